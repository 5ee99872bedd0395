"""Trilinear hexahedron basis and 2x2x2 Gauss rule."""
import numpy as np

# Corner signs in the standard ordering: bottom face counter-clockwise, then top.
CORNERS = np.array([
    [-1, -1, -1],
    [+1, -1, -1],
    [+1, +1, -1],
    [-1, +1, -1],
    [-1, -1, +1],
    [+1, -1, +1],
    [+1, +1, +1],
    [-1, +1, +1],
], dtype=float)


def shape(xi):
    """Shape functions and their natural-coordinate gradients.

    Parameters
    ----------
    xi : array_like, shape (..., 3)
        Points in the reference cube [-1, 1]^3.

    Returns
    -------
    N : ndarray, shape (..., 8)
    dN : ndarray, shape (..., 8, 3)
        ``dN[..., a, k] = dN_a / dxi_k``.
    """
    xi = np.asarray(xi, dtype=float)
    f = 1.0 + xi[..., None, :] * CORNERS            # (..., 8, 3)
    N = 0.125 * np.prod(f, axis=-1)
    dN = np.empty(f.shape)
    dN[..., 0] = 0.125 * CORNERS[:, 0] * f[..., 1] * f[..., 2]
    dN[..., 1] = 0.125 * CORNERS[:, 1] * f[..., 0] * f[..., 2]
    dN[..., 2] = 0.125 * CORNERS[:, 2] * f[..., 0] * f[..., 1]
    return N, dN


def gauss_points():
    """2x2x2 Gauss points (ordered like CORNERS) and unit weights."""
    g = 1.0 / np.sqrt(3.0)
    return CORNERS * g, np.ones(8)
