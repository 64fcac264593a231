"""Independent brute-force reference implementations used by the tests."""

import numpy as np


def naive_dct(series):
    """Direct evaluation of the orthonormal DCT-II definition sum."""
    n = len(series)
    out = np.empty(n)
    for u in range(n):
        scale = np.sqrt(1.0 / n) if u == 0 else np.sqrt(2.0 / n)
        acc = 0.0
        for t in range(n):
            acc += series[t] * np.cos(np.pi * (2 * t + 1) * u / (2 * n))
        out[u] = scale * acc
    return out


def naive_dct2(grid):
    """O(n^4) definition sum of the 2-D orthonormal DCT-II."""
    n = grid.shape[0]
    out = np.empty((n, n))
    for u in range(n):
        cu = np.sqrt(1.0 / n) if u == 0 else np.sqrt(2.0 / n)
        for v in range(n):
            cv = np.sqrt(1.0 / n) if v == 0 else np.sqrt(2.0 / n)
            acc = 0.0
            for r in range(n):
                for c in range(n):
                    acc += (
                        grid[r, c]
                        * np.cos(np.pi * (2 * r + 1) * u / (2 * n))
                        * np.cos(np.pi * (2 * c + 1) * v / (2 * n))
                    )
            out[u, v] = cu * cv * acc
    return out
