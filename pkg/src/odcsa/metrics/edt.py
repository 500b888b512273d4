"""Exact Euclidean distance transform with nearest-site indices.

Two separable passes: a per-column scan for the nearest site in each column,
then a per-row lower envelope of parabolas (Felzenszwalb-Huttenlocher).
All squared distances are integers, so the result is exact.  Among
equidistant sites the one with the smallest column, then smallest row, wins.
"""
from __future__ import annotations

import numpy as np

_NONE = -1


def _column_pass(sites: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per column: squared vertical distance and row of the nearest site (-1 if none)."""
    h, w = sites.shape
    rows = np.full((h, w), _NONE, dtype=np.int64)
    last = np.full(w, _NONE, dtype=np.int64)
    for r in range(h):
        last = np.where(sites[r], r, last)
        rows[r] = last
    # backward sweep keeps the upper site on ties
    nxt = np.full(w, _NONE, dtype=np.int64)
    for r in range(h - 1, -1, -1):
        nxt = np.where(sites[r], r, nxt)
        up = rows[r]
        take_down = (nxt != _NONE) & ((up == _NONE) | (nxt - r < r - up))
        rows[r] = np.where(take_down, nxt, up)
    d2 = np.where(rows == _NONE, -1, (np.arange(h)[:, None] - rows) ** 2)
    return d2, rows


def _row_envelope(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """1-D squared transform of a row where f[q] < 0 marks 'no site in column q'."""
    n = f.size
    cols = [q for q in range(n) if f[q] >= 0]
    out_d = np.full(n, -1, dtype=np.int64)
    out_q = np.full(n, _NONE, dtype=np.int64)
    if not cols:
        return out_d, out_q
    v = [cols[0]]
    z = [-np.inf, np.inf]
    for q in cols[1:]:
        while True:
            p = v[-1]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[-2]:
                v.pop()
                z.pop()
                if not v:
                    break
            else:
                break
        if not v:
            v.append(q)
            z = [-np.inf, np.inf]
        else:
            z[-1] = s
            v.append(q)
            z.append(np.inf)
    k = 0
    for x in range(n):
        while z[k + 1] < x:
            k += 1
        q = v[k]
        out_q[x] = q
        out_d[x] = (x - q) ** 2 + f[q]
    return out_d, out_q


def distance_transform(sites: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distance from every pixel to the nearest nonzero pixel of ``sites``.

    Returns ``(dist, nearest)`` where ``nearest`` has shape (2, h, w) holding the
    row and column of the chosen site.  Without any site the distance is
    ``inf`` and the indices are -1.
    """
    sites = np.asarray(sites).astype(bool)
    h, w = sites.shape
    col_d2, col_rows = _column_pass(sites)
    d2 = np.full((h, w), -1, dtype=np.int64)
    near_r = np.full((h, w), _NONE, dtype=np.int64)
    near_c = np.full((h, w), _NONE, dtype=np.int64)
    for r in range(h):
        d, q = _row_envelope(col_d2[r])
        d2[r] = d
        near_c[r] = q
        near_r[r] = np.where(q >= 0, col_rows[r, np.maximum(q, 0)], _NONE)
    dist = np.where(d2 < 0, np.inf, np.sqrt(np.maximum(d2, 0).astype(np.float64)))
    return dist, np.stack([near_r, near_c])
