"""
Manufactured displacement field and exact source terms.

The field is ``u_i = C1 sin(n pi X) sin(n pi Y) sin(n pi Z)`` for every
component i. It vanishes on all faces of the unit cube, so the boundary
condition is a homogeneous Dirichlet one.

The source term ``phi = -Div P`` is evaluated pointwise through the chain
rule ``(Div P)_i = A_ikmn dF_mn/dX_k`` with the consistent tangent ``A``
and the exact second derivatives of the field. :func:`oracle_source`
provides an independent fourth-order finite-difference check.
"""
import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import tensor as T
from .constitutive import CaseId, MaterialParams, pk1, tangent
from .errors import BoundaryNode, NonPositiveJacobian


def sinpi(t):
    """sin(pi t) with exact zeros at integers and exact +-1 at half-integers."""
    t = np.asarray(t, dtype=float)
    r = t - 2.0 * np.round(t / 2.0)          # r in [-1, 1]
    out = np.sin(np.pi * r)
    out = np.where(np.abs(r) == 1.0, 0.0, out)
    return np.where(np.abs(r) == 0.5, np.sign(r), out)


def cospi(t):
    """cos(pi t) with exact zeros at half-integers."""
    return sinpi(np.asarray(t, dtype=float) + 0.5)


class DerivBundle(NamedTuple):
    u: np.ndarray       # (..., 3)
    gradU: np.ndarray   # (..., 3, 3), gradU[i, j] = du_i/dX_j
    hessU: np.ndarray   # (..., 3, 3, 3), hessU[i, j, k] = d2u_i/dX_j dX_k


class Kinematics(NamedTuple):
    F: np.ndarray
    B: np.ndarray
    C: np.ndarray
    J: np.ndarray


class SourceEval(NamedTuple):
    phi: np.ndarray     # force per reference volume
    J: np.ndarray


@dataclass(frozen=True)
class MmsField:
    """Trigonometric manufactured displacement with amplitude C1 and n periods."""
    C1: float = 0.01
    n: int = 2

    def __post_init__(self):
        if not np.isfinite(self.C1) or self.C1 == 0.0:
            raise ValueError("C1 must be finite and nonzero")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be an integer >= 1")

    @property
    def max_magnitude(self):
        """Largest |u| over the domain, sqrt(3) C1."""
        return np.sqrt(3.0) * abs(self.C1)

    def displacement(self, X):
        X = np.asarray(X, dtype=float)
        s = sinpi(self.n * X)
        val = self.C1 * np.prod(s, axis=-1)
        return np.repeat(val[..., None], 3, axis=-1)

    def evaluate(self, X) -> DerivBundle:
        return evaluate(self, X)


REFERENCE_FIELD = MmsField(0.01, 2)


def evaluate(field: MmsField, X) -> DerivBundle:
    """Closed-form value, gradient and Hessian of the manufactured field."""
    X = np.asarray(X, dtype=float)
    t = field.n * X
    s = sinpi(t)
    c = cospi(t)
    k = field.n * np.pi
    C1 = field.C1

    u_scalar = C1 * s[..., 0] * s[..., 1] * s[..., 2]
    # d/dX_j of the scalar profile
    g = C1 * k * np.stack([c[..., 0] * s[..., 1] * s[..., 2],
                           s[..., 0] * c[..., 1] * s[..., 2],
                           s[..., 0] * s[..., 1] * c[..., 2]], axis=-1)
    # d2/dX_j dX_k; off-diagonals carry cos_j cos_k sin_l
    Hs = np.empty(X.shape[:-1] + (3, 3))
    diag = -C1 * k * k * s[..., 0] * s[..., 1] * s[..., 2]
    for j in range(3):
        Hs[..., j, j] = diag
    for j, kk, l in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        v = C1 * k * k * c[..., j] * c[..., kk] * s[..., l]
        Hs[..., j, kk] = v
        Hs[..., kk, j] = v

    u = np.repeat(u_scalar[..., None], 3, axis=-1)
    gradU = np.repeat(g[..., None, :], 3, axis=-2)
    hessU = np.repeat(Hs[..., None, :, :], 3, axis=-3)
    return DerivBundle(u, gradU, hessU)


def kinematics(field: MmsField, X) -> Kinematics:
    """F = I + Grad u, B = F F^T, C = F^T F and J = det F at reference points X."""
    d = evaluate(field, X)
    F = T.I3 + d.gradU
    J = T.det(F)
    if np.any(J <= 0.0):
        raise NonPositiveJacobian("manufactured field inverts the material (det F <= 0)")
    Ft = T.transpose(F)
    return Kinematics(F, T.sym(F @ Ft), T.sym(Ft @ F), J)


def source(case, params: MaterialParams, field: MmsField, X) -> SourceEval:
    """Exact source term phi = -Div P at reference points X."""
    case = CaseId.parse(case)
    d = evaluate(field, X)
    F = T.I3 + d.gradU
    A = tangent(case, params, F)
    # dF_mn/dX_k = hessU[m, n, k]
    # + 0.0 turns -0.0 into 0.0 so exported files never carry signed zeros
    phi = -np.einsum('...ikmn,...mnk->...i', A, d.hessU) + 0.0
    return SourceEval(phi, T.det(F))


def oracle_source(case, params: MaterialParams, field: MmsField, X, step=1e-3):
    """Source term by fourth-order central differences of P(X).

    Independent of the tangent: only :func:`pk1` and the field gradient
    are used.
    """
    case = CaseId.parse(case)
    X = np.asarray(X, dtype=float)
    h = float(step)

    def P_at(Y):
        return pk1(case, params, T.I3 + evaluate(field, Y).gradU)

    div = np.zeros(X.shape)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dPk = (-P_at(X + 2 * e) + 8 * P_at(X + e) - 8 * P_at(X - e) + P_at(X - 2 * e)) / (12 * h)
        div += dPk[..., :, k]
    return -div


def case1_closed_form(X):
    """Case I source for C1 = 0.01, n = 2, lambda = 100, mu = 50 in closed form."""
    X = np.asarray(X, dtype=float)
    x, y, z = X[..., 0], X[..., 1], X[..., 2]
    tp = 2.0 * np.pi
    sss = 2.0 * np.sin(tp * x) * np.sin(tp * y) * np.sin(tp * z)
    c = 6.0 * np.pi ** 2
    return np.stack([
        c * (sss - np.sin(np.pi * (2 * y + 2 * z)) * np.cos(tp * x)),
        c * (sss - np.sin(np.pi * (2 * x + 2 * z)) * np.cos(tp * y)),
        c * (sss - np.sin(np.pi * (2 * x + 2 * y)) * np.cos(tp * z)),
    ], axis=-1)


def is_boundary_point(X, tol=0.0):
    X = np.asarray(X, dtype=float)
    return np.any((X <= tol) | (X >= 1.0 - tol), axis=-1)


def load_value(case, params: MaterialParams, field: MmsField, X, mode, nlgeom=None, h=None):
    """Load applied for the source term at reference point(s) X.

    ``mode='lumped'`` gives the concentrated nodal force phi h^3 and is
    only defined for interior nodes of a uniform grid with spacing ``h``.
    ``mode='body'`` gives the distributed-load magnitude: phi when the
    small-strain formulation is used, phi / J under finite strain (the
    external solver then integrates over the current volume). ``nlgeom``
    defaults to the finite-strain flag of ``case``.
    """
    case = CaseId.parse(case)
    if nlgeom is None:
        nlgeom = case.finite_strain
    ev = source(case, params, field, X)
    if mode == "lumped":
        if h is None or h <= 0:
            raise ValueError("lumped loads need a positive grid spacing h")
        if np.any(is_boundary_point(X)):
            raise BoundaryNode("lumped loads are only defined at interior nodes")
        return ev.phi * h ** 3
    if mode == "body":
        return ev.phi / ev.J[..., None] if nlgeom else ev.phi
    raise ValueError(f"unknown load mode {mode!r}")


FIELD_CSV_HEADER = ("X", "Y", "Z", "phi_x", "phi_y", "phi_z", "phi_mag", "J")


def write_field_csv(out, case, params, field, X):
    """Write the source field at points X as ``X,Y,Z,phi_x,phi_y,phi_z,phi_mag,J``.

    Returns the number of data rows.
    """
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    ev = source(case, params, field, X)
    mag = np.linalg.norm(ev.phi, axis=-1)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FIELD_CSV_HEADER)
    for row in zip(X, ev.phi, mag, ev.J):
        w.writerow([repr(float(v)) for v in (*row[0], *row[1], row[2], row[3])])
    return len(X)


def plane_points(N, z):
    """(N+1)^2 grid points on the plane Z = z, X fastest."""
    g = np.arange(N + 1) / N
    Y, Xg = np.meshgrid(g, g, indexing="ij")
    return np.stack([Xg.ravel(), Y.ravel(), np.full(Xg.size, float(z))], axis=-1)
