"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Same arithmetic, same order of operations per element, so results agree to
the last few ulps (``exp`` and summation order may differ between libm and
numpy).
"""

import numpy as np

BACKEND = "python"


def gaussian_cross(a, b, sigma_x, sigma_y):
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    dx = a[:, 0, None] - b[None, :, 0]
    dy = a[:, 1, None] - b[None, :, 1]
    return np.exp(-(dx * dx / (sigma_x * sigma_x) + dy * dy / (sigma_y * sigma_y)))


def idw_weights(queries, samples):
    q = np.asarray(queries, dtype=np.float64).reshape(-1, 2)
    s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    dx = q[:, 0, None] - s[None, :, 0]
    dy = q[:, 1, None] - s[None, :, 1]
    d = np.sqrt(dx * dx + dy * dy)
    zero = d == 0.0
    any_hit = zero.any(axis=1)
    hit = np.where(any_hit, zero.argmax(axis=1), -1).astype(np.int64)
    with np.errstate(divide="ignore"):
        w = 1.0 / d
    w[any_hit] = 0.0
    w[any_hit, hit[any_hit]] = 1.0
    free = ~any_hit
    w[free] /= w[free].sum(axis=1, keepdims=True)
    return w, hit


def points_in_rings(px, py, ring_x, ring_y, ring_starts):
    x = np.asarray(px, dtype=np.float64)
    y = np.asarray(py, dtype=np.float64)
    rx = np.asarray(ring_x, dtype=np.float64)
    ry = np.asarray(ring_y, dtype=np.float64)
    starts = np.asarray(ring_starts, dtype=np.int64)
    parity = np.zeros(x.shape, dtype=bool)
    edge = np.zeros(x.shape, dtype=bool)
    for r in range(len(starts) - 1):
        lo, hi = starts[r], starts[r + 1]
        j = hi - 1
        for i in range(lo, hi):
            xi, yi, xj, yj = rx[i], ry[i], rx[j], ry[j]
            ex = xi - xj
            ey = yi - yj
            cross = ex * (y - yj) - ey * (x - xj)
            edge |= (
                (np.abs(cross) <= 1e-12 * (ex * ex + ey * ey))
                & (x >= min(xi, xj)) & (x <= max(xi, xj))
                & (y >= min(yi, yj)) & (y <= max(yi, yj))
            )
            straddle = (yi > y) != (yj > y)
            if straddle.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    xint = (xj - xi) * (y - yi) / (yj - yi) + xi
                parity ^= straddle & (x < xint)
            j = i
    return (edge | parity).astype(np.uint8)
