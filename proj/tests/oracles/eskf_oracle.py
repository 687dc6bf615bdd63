"""Oracle values for the filter tests.

The Kalman update is computed in the textbook form K = P H^T S^-1,
P+ = (I - K H) P, which equals the Joseph form for the optimal gain. The
attitude residual goes through scipy's Rotation instead of hand-written
matrices.
"""
import numpy as np
from scipy.spatial.transform import Rotation

np.set_printoptions(precision=17)


def kf(P, H, R, dz):
    S = H @ P @ H.T + R
    K = P @ H.T @ np.linalg.inv(S)
    return K @ dz, (np.eye(P.shape[0]) - K @ H) @ P, K


# scalar
dx, P, K = kf(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([2.0]))
print("scalar gain", K[0, 0], "P+", P[0, 0], "dx", dx[0])

# 3 states, 2 measurements
P0 = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 0.8]])
H = np.array([[1.0, 0.0, 0.5], [0.0, -1.0, 0.0]])
R = np.diag([0.4, 0.25])
dz = np.array([0.7, -0.3])
dx, P, K = kf(P0, H, R, dz)
print("dx3", repr(dx))
print("P3", repr(P))

# attitude residual: aiding and INS nav->body matrices, angles of D_aid^T D_ins
def nav_to_body(psi, theta, phi):
    return Rotation.from_euler("ZYX", [psi, theta, phi]).as_matrix().T


aid = (0.4, 0.05, -0.03)   # psi, theta, phi
ins = (0.35, 0.02, 0.01)
M = nav_to_body(*aid).T @ nav_to_body(*ins)
psi, theta, phi = Rotation.from_matrix(M.T).as_euler("ZYX")
print("residual att (phi, theta, psi)", repr(np.array([phi, theta, psi])))

# discrete process noise over dt for one axis
a_rw, g_rw, q_pos, q_vel, q_att, dt = 0.005, 0.0008726646259971648, 1e-6, 2e-5, 3e-7, 1.0
print("Q pp", a_rw**2 * dt**3 / 3 + q_pos * dt)
print("Q pv", a_rw**2 * dt**2 / 2)
print("Q vv", a_rw**2 * dt + q_vel * dt)
print("Q aa", g_rw**2 * dt + q_att * dt)
