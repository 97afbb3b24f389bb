"""Discrete differential operators on dense 2-D grids.

Scalar fields are ``(H, W)`` float arrays; vector fields are ``(2, H, W)``
arrays whose first axis holds the row and column components. Pixel spacing
is one. The gradient uses forward differences with a Neumann boundary and
the divergence is built as its exact negative adjoint, so

    <divergence(p), f> == -<p, gradient(f)>

holds to rounding error on every grid shape.
"""

import numpy as np


def gradient(f):
    """Forward-difference gradient with zero flux across the last row/column.

    Parameters
    ----------
    f : ndarray, shape (H, W)

    Returns
    -------
    ndarray, shape (2, H, W)
        ``out[0]`` holds ``f[i+1, j] - f[i, j]`` and ``out[1]`` holds
        ``f[i, j+1] - f[i, j]``; both are zero where the neighbour is missing.
    """
    f = np.asarray(f, dtype=np.float64)
    out = np.zeros((2,) + f.shape)
    out[0, :-1, :] = f[1:, :] - f[:-1, :]
    out[1, :, :-1] = f[:, 1:] - f[:, :-1]
    return out


def divergence(p):
    """Backward-difference divergence, the negative adjoint of :func:`gradient`.

    ``div p(i, j) = p1(i, j) - p1(i-1, j) + p2(i, j) - p2(i, j-1)`` with
    out-of-range terms dropped. The components stored on the last row
    (resp. column) never carry flux because the gradient is zero there.
    """
    p = np.asarray(p, dtype=np.float64)
    p1, p2 = p[0], p[1]
    out = np.zeros(p1.shape)
    out[:-1, :] += p1[:-1, :]
    out[1:, :] -= p1[:-1, :]
    out[:, :-1] += p2[:, :-1]
    out[:, 1:] -= p2[:, :-1]
    return out


def _integral_image(f):
    s = np.zeros((f.shape[0] + 1, f.shape[1] + 1))
    s[1:, 1:] = f.cumsum(axis=0).cumsum(axis=1)
    return s


def _window_bounds(n, radius):
    idx = np.arange(n)
    lo = np.clip(idx - radius, 0, n)
    hi = np.clip(idx + radius + 1, 0, n)
    return lo, hi


def box_neighborhood_sum(f, radius):
    """Sum of ``f`` over the ``(2r+1) x (2r+1)`` window around each pixel.

    Windows are clipped at the image border (no padding), so border pixels
    sum over fewer cells; see :func:`neighborhood_count`.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    f = np.asarray(f, dtype=np.float64)
    if radius == 0:
        return f.copy()
    s = _integral_image(f)
    r0, r1 = _window_bounds(f.shape[0], radius)
    c0, c1 = _window_bounds(f.shape[1], radius)
    return (
        s[r1[:, None], c1[None, :]]
        - s[r0[:, None], c1[None, :]]
        - s[r1[:, None], c0[None, :]]
        + s[r0[:, None], c0[None, :]]
    )


def neighborhood_count(shape, radius):
    """Number of pixels in each clipped window, i.e. ``|N(x)|`` per pixel."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    r0, r1 = _window_bounds(shape[0], radius)
    c0, c1 = _window_bounds(shape[1], radius)
    return ((r1 - r0)[:, None] * (c1 - c0)[None, :]).astype(np.float64)
