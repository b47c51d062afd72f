"""Uniform-grid helpers: 4th-order differencing and 4-point interpolation."""
import numpy as np

# one-sided 5-point stencils for the first two and last two nodes
_FWD0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_FWD1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_CEN = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def diff4(y, h):
    """First derivative along axis 0 of samples on a uniform grid, O(h^4)."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 5:
        raise ValueError("diff4 needs at least 5 samples")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / 12.0
    d[0] = np.tensordot(_FWD0, y[:5], axes=1)
    d[1] = np.tensordot(_FWD1, y[:5], axes=1)
    d[-1] = -np.tensordot(_FWD0, y[::-1][:5], axes=1)
    d[-2] = -np.tensordot(_FWD1, y[::-1][:5], axes=1)
    return d / h


def interp4(x0, h, values, x):
    """Cubic Lagrange interpolation through the 4 nearest uniform nodes.

    ``values[k]`` is the sample at ``x0 + k h``. Exact at the nodes. ``x`` may
    be a scalar or an array; the result has shape ``x.shape + values.shape[1:]``.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    x = np.asarray(x, dtype=float)
    r = (x - x0) / h
    k = np.clip(np.floor(r).astype(int) - 1, 0, n - 4)
    p = r - k  # position relative to node k, nominally in [1, 2]
    w0 = -(p - 1.0) * (p - 2.0) * (p - 3.0) / 6.0
    w1 = p * (p - 2.0) * (p - 3.0) / 2.0
    w2 = -p * (p - 1.0) * (p - 3.0) / 2.0
    w3 = p * (p - 1.0) * (p - 2.0) / 6.0
    extra = (slice(None),) * x.ndim + (None,) * (values.ndim - 1)
    out = (
        w0[extra] * values[k] + w1[extra] * values[k + 1] + w2[extra] * values[k + 2] + w3[extra] * values[k + 3]
        if x.ndim
        else w0 * values[k] + w1 * values[k + 1] + w2 * values[k + 2] + w3 * values[k + 3]
    )
    # snap exactly onto nodes so that interpolation is bit-exact there
    on_node = np.isclose(r, np.round(r), rtol=0.0, atol=1e-12) & (np.round(r) >= 0) & (np.round(r) <= n - 1)
    if x.ndim == 0:
        return values[int(np.round(r))].copy() if on_node else out
    if np.any(on_node):
        out[on_node] = values[np.round(r[on_node]).astype(int)]
    return out


def _fd_weights(offsets):
    """First-derivative weights for the given integer stencil offsets."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def diff_stencil(y, h, points=9):
    """First derivative on a uniform grid with a ``points``-wide stencil.

    Centered where possible and shifted one-sided near the ends; the order
    of accuracy is ``points - 1``.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < points:
        raise ValueError(f"need at least {points} samples")
    half = points // 2
    d = np.empty_like(y)
    w = _fd_weights(np.arange(-half, half + 1))
    d[half:n - half] = sum(w[i] * y[i:n - 2 * half + i] for i in range(points))
    for k in list(range(half)) + list(range(n - half, n)):
        start = min(max(k - half, 0), n - points)
        wk = _fd_weights(np.arange(start, start + points) - k)
        d[k] = np.tensordot(wk, y[start:start + points], axes=1)
    return d / h
