"""Largest 4-connected blob of a window via scipy.ndimage.label."""
import numpy as np
from scipy import ndimage

w = np.zeros((8, 8))
w[1:3, 1:4] = 0.02          # 6 px
w[5:8, 5:7] = 0.03          # 6 px, larger volume
w[4, 4] = 0.05              # diagonal neighbour only: separate region
w[0, 7] = 0.004             # below threshold
lab, n = ndimage.label(w > 0.005)   # default structure is 4-connected
m2 = 0.025 ** 2
vols = [w[lab == k].sum() * m2 for k in range(1, n + 1)]
k = int(np.argmax(vols)) + 1
rr, cc = np.nonzero(lab == k)
wts = w[rr, cc]
print("regions", n, "volumes", [repr(v) for v in vols])
print("largest centroid (r, c)", repr((rr * wts).sum() / wts.sum()), repr((cc * wts).sum() / wts.sum()))
