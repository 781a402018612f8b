"""Pure numpy versions of the per-record kernels.

Same signatures and arithmetic order as the compiled module, so decisions
match bit for bit; sums agree to rounding (numpy's own pairwise reduction).
"""
import numpy as np


def evaluate_range(c, b, lam, start, stop, x, out):
    L = lam.shape[0]
    if out.shape[0] != 3 + L:
        raise ValueError("accumulator width mismatch")
    cs = c[start:stop]
    adj = cs.copy()
    for k in range(L):
        adj += lam[k] * b[start:stop, k]
    sel = adj > 0.0
    x[start:stop] = sel
    # zeros in place of unselected records keep the summation tree fixed, so
    # totals move monotonically when single records enter or leave
    out[0] = np.where(sel, cs, 0.0).sum()
    out[1] = np.where(sel, adj, 0.0).sum()
    out[2] = np.count_nonzero(sel)
    for k in range(L):
        out[3 + k] = np.where(sel, b[start:stop, k], 0.0).sum()


MAX_NUDGE = 64


def _adjusted_at(c, b, lam, k, v):
    adj = c.copy()
    for j in range(lam.shape[0]):
        adj += (v if j == k else lam[j]) * b[:, j]
    return adj


def roots_range(c, b, lam, k, start, stop, roots):
    L = lam.shape[0]
    bk = b[start:stop, k]
    nz = np.flatnonzero(bk != 0.0)
    cs = c[start:stop][nz]
    bs = b[start:stop][nz]
    rest = cs.copy()
    for j in range(L):
        if j != k:
            rest += lam[j] * bs[:, j]
    r = -rest / bs[:, k]
    toward = np.where(bs[:, k] < 0.0, np.inf, -np.inf)
    # nudge until the record is deselected at its own root, as in the compiled kernel
    for _ in range(MAX_NUDGE):
        bad = _adjusted_at(cs, bs, lam, k, r) > 0.0
        if not bad.any():
            break
        r = np.where(bad, np.nextafter(r, toward), r)
    r = r[r > 0.0]
    roots[start:start + r.shape[0]] = r
    return r.shape[0]
