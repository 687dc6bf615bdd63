"""Independent oracle values for the geometry tests.

Builds rotations from elementary axis matrices with numpy and transcribes the
attitude-interpolation steps literally, one line per step. Run once; the
printed numbers are frozen into tests/test_geometry.cpp.
"""
import numpy as np


def rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def ry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])


def rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])


def nav_to_body(psi, theta, phi):
    # body->nav is Rz(psi) Ry(theta) Rx(phi); the nav->body matrix is its transpose
    return (rz(psi) @ ry(theta) @ rx(phi)).T


def qmul(a, b):
    ar, ai = a[0], np.array(a[1:])
    br, bi = b[0], np.array(b[1:])
    r = ar * br - ai @ bi
    i = ar * bi + br * ai + np.cross(ai, bi)
    return np.concatenate([[r], i])


def interp_literal(q1, q2, n):
    prod = qmul(q1, q2)
    q_inc = prod / np.linalg.norm(prod) * (1.0 / n)
    out = []
    for k in range(n):
        step = np.concatenate([[q_inc[0]], k * q_inc[1:]])
        step = step / np.linalg.norm(step)
        q = qmul(q1, step)
        q = q / np.linalg.norm(q)
        if q[0] < 0:
            q = -q
        out.append(q)
    return out


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    print("yaw90 nav->body:")
    print(repr(nav_to_body(np.pi / 2, 0, 0)))
    print("(0.3, 0.1, -0.2) nav->body:")
    print(repr(nav_to_body(0.3, 0.1, -0.2)))
    h = np.pi / 4
    q_yaw90 = np.array([np.cos(h), 0, 0, np.sin(h)])
    print("literal interpolation identity -> yaw90, n=3:")
    for q in interp_literal(np.array([1.0, 0, 0, 0]), q_yaw90, 3):
        print(repr(q))
