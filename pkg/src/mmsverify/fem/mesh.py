"""Structured hexahedral grid of the unit cube."""
from functools import cached_property

import numpy as np

from ..errors import InvalidResolution
from .element import CORNERS, gauss_points, shape


class Mesh:
    """Uniform N x N x N hexahedral mesh of [0, 1]^3.

    Nodes are numbered lexicographically with X fastest, then Y, then Z
    (0-based here; exported decks add one). Element connectivity follows
    the corner ordering of :data:`element.CORNERS`.
    """

    def __init__(self, N):
        if int(N) != N or N < 2:
            raise InvalidResolution(f"need at least 2 elements per side, got {N}")
        self.N = int(N)
        self.h = 1.0 / self.N
        n1 = self.N + 1
        g = np.arange(n1) / self.N
        Z, Y, X = np.meshgrid(g, g, g, indexing="ij")
        self.nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)

        e = np.arange(self.N)
        ez, ey, ex = np.meshgrid(e, e, e, indexing="ij")
        base = (ex + n1 * ey + n1 * n1 * ez).ravel()
        c = ((CORNERS + 1) // 2).astype(np.int64)
        offsets = c[:, 0] + n1 * c[:, 1] + n1 * n1 * c[:, 2]
        self.elems = base[:, None] + offsets[None, :]

        ijk = np.stack(np.unravel_index(np.arange(n1 ** 3), (n1, n1, n1)), axis=-1)
        on_face = np.any((ijk == 0) | (ijk == self.N), axis=-1)
        self.boundary_nodes = np.flatnonzero(on_face)
        self.interior_nodes = np.flatnonzero(~on_face)

    def __repr__(self):
        return f"Mesh(N={self.N})"

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elems(self):
        return len(self.elems)

    @property
    def n_dofs(self):
        return 3 * self.n_nodes

    @cached_property
    def boundary_mask(self):
        """Boolean mask over dofs, True where the displacement is fixed."""
        m = np.zeros(self.n_nodes, dtype=bool)
        m[self.boundary_nodes] = True
        return np.repeat(m, 3)

    @cached_property
    def elem_dofs(self):
        return (3 * self.elems[:, :, None] + np.arange(3)).reshape(self.n_elems, 24)

    @cached_property
    def quadrature(self):
        """Shape values, reference gradients and weights at the Gauss points.

        Every element is the same cube of side h, so the map is affine and
        ``dN/dX = (2/h) dN/dxi`` with ``dV = (h/2)^3 dxi``.
        """
        xi, w = gauss_points()
        Nq, dNq = shape(xi)
        G = dNq * (2.0 / self.h)
        return Nq, G, w * (self.h / 2.0) ** 3

    def gauss_coordinates(self, elems=slice(None)):
        """Reference coordinates of the Gauss points, shape (n_elem, 8, 3)."""
        Nq, _, _ = self.quadrature
        X = self.nodes[self.elems[elems]]
        return np.einsum('qa,eak->eqk', Nq, X)

    def chunks(self, size=4096):
        for start in range(0, self.n_elems, size):
            yield slice(start, min(start + size, self.n_elems))


def build_mesh(N) -> Mesh:
    return Mesh(N)
