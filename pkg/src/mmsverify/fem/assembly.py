"""
Total-Lagrangian assembly of internal forces, tangent stiffness and loads.

Element loops are vectorized over chunks of elements. Scatter-add into the
global vectors uses ``np.bincount`` and the global matrix is filled through
a precomputed map from element entries to CSR slots, so the reduction order
is fixed and repeated runs are bit-identical.
"""
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .. import tensor as T
from ..constitutive import CaseId, pk1, tangent
from ..errors import NonPositiveJacobian
from ..manufactured import source
from .mesh import Mesh


def _element_F(mesh, ue, q):
    _, G, _ = mesh.quadrature
    return T.I3 + np.einsum('eai,ak->eik', ue, G[q])


def _nodal(u, mesh):
    u = np.asarray(u, dtype=float)
    if u.size != mesh.n_dofs:
        raise ValueError(f"displacement has {u.size} entries, mesh needs {mesh.n_dofs}")
    return u.reshape(mesh.n_nodes, 3)


def _reraise_with_element(err, chunk):
    if err.index is not None:
        err.element = chunk.start + err.index
        err.args = (f"{err.args[0]} in element {err.element}",)
    raise err


def assemble_internal(mesh: Mesh, u, case, params):
    """Internal force vector ``f_a = int P . Grad N_a dV0`` (length 3 n_nodes)."""
    case = CaseId.parse(case)
    U = _nodal(u, mesh)
    _, G, w = mesh.quadrature
    f = np.zeros(mesh.n_dofs)
    for chunk in mesh.chunks():
        ue = U[mesh.elems[chunk]]
        fe = np.zeros(ue.shape)
        for q in range(8):
            F = _element_F(mesh, ue, q)
            try:
                P = pk1(case, params, F)
            except NonPositiveJacobian as err:
                _reraise_with_element(err, chunk)
            fe += w[q] * np.einsum('eik,ak->eai', P, G[q])
        f += np.bincount(mesh.elem_dofs[chunk].ravel(), fe.ravel(), minlength=mesh.n_dofs)
    return f


class _CsrPattern:
    """Sparsity pattern of the 24x24 element blocks and the scatter map."""

    def __init__(self, mesh):
        n = mesh.n_dofs
        dofs = mesh.elem_dofs
        rows = np.repeat(dofs, 24, axis=1).ravel()
        cols = np.tile(dofs, (1, 24)).ravel()
        keys = rows.astype(np.int64) * n + cols
        ukeys = np.unique(keys)
        self.indices = (ukeys % n).astype(np.int32)
        row_of = ukeys // n
        self.indptr = np.searchsorted(row_of, np.arange(n + 1)).astype(np.int64)
        self.slot = np.searchsorted(ukeys, keys).astype(np.int32).reshape(mesh.n_elems, 576)
        self.nnz = len(ukeys)
        fixed = mesh.boundary_mask
        self.constrained = fixed[row_of] | fixed[self.indices]
        diag = row_of == self.indices
        self.fixed_diag = np.flatnonzero(diag & fixed[row_of])


@lru_cache(maxsize=4)
def _pattern(N):
    return _CsrPattern(Mesh(N))


def apply_dirichlet(K, mesh):
    """Zero fixed rows/columns and put a unit on their diagonal.

    ``K`` must carry the mesh's element-block sparsity pattern (as returned
    by :func:`assemble_tangent` with ``apply_bc=False``); it is modified in
    place and returned.
    """
    pat = _pattern(mesh.N)
    K.data[pat.constrained] = 0.0
    K.data[pat.fixed_diag] = 1.0
    return K


def assemble_tangent(mesh: Mesh, u, case, params, symmetrize=False, apply_bc=True):
    """Global tangent stiffness ``K_ab = int Grad N_a . A . Grad N_b dV0`` (CSR).

    The Case III tangent is slightly non-symmetric; ``symmetrize=True``
    assembles (K + K^T) / 2 instead of the consistent matrix. With
    ``apply_bc`` the Dirichlet rows and columns are replaced by identity.
    """
    case = CaseId.parse(case)
    U = _nodal(u, mesh)
    _, G, w = mesh.quadrature
    pat = _pattern(mesh.N)
    data = np.zeros(pat.nnz)
    for chunk in mesh.chunks():
        ue = U[mesh.elems[chunk]]
        Ke = np.zeros((ue.shape[0], 8, 3, 8, 3))
        for q in range(8):
            F = _element_F(mesh, ue, q)
            try:
                A = tangent(case, params, F)
            except NonPositiveJacobian as err:
                _reraise_with_element(err, chunk)
            Ke += w[q] * np.einsum('ak,eikjl,bl->eaibj', G[q], A, G[q], optimize=True)
        Ke = Ke.reshape(-1, 24, 24)
        if symmetrize:
            Ke = 0.5 * (Ke + np.swapaxes(Ke, 1, 2))
        data += np.bincount(pat.slot[chunk].ravel(), Ke.ravel(), minlength=pat.nnz)
    K = sp.csr_matrix((data, pat.indices, pat.indptr), shape=(mesh.n_dofs, mesh.n_dofs))
    if apply_bc:
        apply_dirichlet(K, mesh)
    return K


def _point_source(mesh, source_case, params, field, X):
    return source(source_case, params, field, X).phi


def assemble_external(mesh: Mesh, field, case, params, load_mode, t=1.0, apply_bc=True):
    """External load vector for the manufactured source of ``case`` at load factor t.

    ``load_mode='lumped'`` puts phi(X_n) h^3 on every interior node.
    ``load_mode='body'`` integrates ``int N_a phi dV0`` with the 2x2x2 rule.
    The source is a force per reference volume, so the total-Lagrangian
    body load needs no 1/J factor. Fixed dofs are zeroed unless
    ``apply_bc`` is False.
    """
    case = CaseId.parse(case)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"load factor must lie in [0, 1], got {t}")
    f = np.zeros(mesh.n_dofs)
    if t == 0.0:
        return f
    if load_mode == "lumped":
        ids = mesh.interior_nodes
        if len(ids):
            phi = _point_source(mesh, case, params, field, mesh.nodes[ids])
            f.reshape(-1, 3)[ids] = phi * mesh.h ** 3
    elif load_mode == "body":
        Nq, _, w = mesh.quadrature
        for chunk in mesh.chunks():
            Xq = mesh.gauss_coordinates(chunk)
            phi = _point_source(mesh, case, params, field, Xq)
            fe = np.einsum('q,qa,eqi->eai', w, Nq, phi)
            f += np.bincount(mesh.elem_dofs[chunk].ravel(), fe.ravel(), minlength=mesh.n_dofs)
    else:
        raise ValueError(f"unknown load mode {load_mode!r}")
    if apply_bc:
        f[mesh.boundary_mask] = 0.0
    return t * f if t != 1.0 else f
