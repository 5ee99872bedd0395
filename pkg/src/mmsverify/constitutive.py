"""
Constitutive models for the three verification cases.

Case I is small-strain Hooke's law with the small-strain identification
P = sigma. Case II is the compressible neo-Hookean model in the
(C10, D1) parameterization. Case III is Hencky elasticity, with the Cauchy
stress linear in the logarithmic strain ln V = 1/2 ln B.

All functions broadcast over leading axes of ``F`` (shape ``(..., 3, 3)``).
The first Piola-Kirchhoff stress of the finite-strain cases is computed
from the Kirchhoff stress, ``P = tau F^{-T}`` with ``tau = J sigma``.
"""
import enum
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import InvalidMaterial, NonPositiveJacobian

# det F at or below this is treated as element inversion.
JACOBIAN_TOL = 1e-10


class CaseId(enum.Enum):
    I = "I"        # small-strain linear elastic
    II = "II"      # finite-strain neo-Hookean
    III = "III"    # finite-strain Hencky

    @classmethod
    def parse(cls, value):
        """Accept a CaseId, a roman numeral or the matching integer."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        key = {"1": "I", "2": "II", "3": "III"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown case {value!r}; expected I, II or III") from None

    @property
    def finite_strain(self):
        return self is not CaseId.I

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MaterialParams:
    """Lame constants plus the derived engineering and hyperelastic constants."""
    lam: float
    mu: float
    E: float
    nu: float
    C10: float
    K0: float
    D1: float

    @classmethod
    def from_lame(cls, lam, mu):
        return from_lame(lam, mu)

    @property
    def bulk(self):
        """Bulk modulus (3 lambda + 2 mu) / 3, equal to K0 and 2 / D1."""
        return (3.0 * self.lam + 2.0 * self.mu) / 3.0


def from_lame(lam, mu) -> MaterialParams:
    lam = float(lam)
    mu = float(mu)
    if not (np.isfinite(lam) and np.isfinite(mu)):
        raise InvalidMaterial("Lame constants must be finite")
    if mu <= 0.0:
        raise InvalidMaterial(f"shear modulus mu must be positive, got {mu}")
    if 3.0 * lam + 2.0 * mu <= 0.0:
        raise InvalidMaterial(f"bulk modulus must be positive (3 lambda + 2 mu = {3 * lam + 2 * mu})")
    K0 = lam + 2.0 * mu / 3.0
    return MaterialParams(
        lam=lam,
        mu=mu,
        E=mu * (3.0 * lam + 2.0 * mu) / (lam + mu),
        nu=lam / (2.0 * (lam + mu)),
        C10=mu / 2.0,
        K0=K0,
        D1=2.0 / K0,
    )


REFERENCE_MATERIAL = from_lame(100.0, 50.0)


def small_strain(gradU):
    """Symmetric part of the displacement gradient."""
    return T.sym(gradU)


def _jacobian(F):
    J = T.det(F)
    bad = ~(J > JACOBIAN_TOL)
    if np.any(bad):
        idx = int(np.flatnonzero(np.ravel(bad))[0])
        raise NonPositiveJacobian(
            f"det F = {np.ravel(J)[idx]:.3e} at point {idx} (element inversion)", index=idx)
    return J


def _hooke(eps, p):
    return 2.0 * p.mu * eps + p.lam * T.trace(eps)[..., None, None] * T.I3


def _kirchhoff(case, p, F, J):
    """Kirchhoff stress J sigma for the finite-strain cases."""
    B = F @ T.transpose(F)
    if case is CaseId.II:
        I1 = T.trace(B)
        Jm23 = J ** (-2.0 / 3.0)
        dev = B - (I1 / 3.0)[..., None, None] * T.I3
        return (p.mu * Jm23)[..., None, None] * dev + (p.bulk * J * (J - 1.0))[..., None, None] * T.I3
    eps_ln = T.mat_func_sym(B, T.HALF_LOG)
    return J[..., None, None] * _hooke(eps_ln, p)


def cauchy(case, params: MaterialParams, F):
    """Cauchy stress for the given case; the result is exactly symmetric."""
    case = CaseId.parse(case)
    F = np.asarray(F, dtype=float)
    if case is CaseId.I:
        return _hooke(T.sym(F) - T.I3, params)
    J = _jacobian(F)
    return T.sym(_kirchhoff(case, params, F, J) / J[..., None, None])


def pk1(case, params: MaterialParams, F):
    """First Piola-Kirchhoff stress P (P = sigma for Case I, J sigma F^-T otherwise)."""
    case = CaseId.parse(case)
    F = np.asarray(F, dtype=float)
    if case is CaseId.I:
        return _hooke(T.sym(F) - T.I3, params)
    J = _jacobian(F)
    tau = T.sym(_kirchhoff(case, params, F, J))
    return tau @ T.transpose(T.inv(F))


def neo_energy_from_C(params: MaterialParams, C):
    """Neo-Hookean strain energy written in terms of C = F^T F."""
    C = np.asarray(C, dtype=float)
    J = np.sqrt(T.det(C))
    I1 = T.trace(C)
    return params.C10 * (J ** (-2.0 / 3.0) * I1 - 3.0) + (J - 1.0) ** 2 / params.D1


def strain_energy_neo(params: MaterialParams, F):
    """W = C10 (J^{-2/3} I1 - 3) + (J - 1)^2 / D1."""
    F = np.asarray(F, dtype=float)
    J = _jacobian(F)
    I1 = np.sum(F * F, axis=(-2, -1))
    return params.C10 * (J ** (-2.0 / 3.0) * I1 - 3.0) + (J - 1.0) ** 2 / params.D1


def _dpk1(case, p, F, dF, Finv_T, J, tau, eig):
    """Directional derivative of P along dF given precomputed state.

    ``F``-dependent arrays must broadcast against ``dF``.
    """
    if case is CaseId.I:
        return _hooke(T.sym(dF), p)
    # a = tr(F^-1 dF) so that dJ = J a
    a = np.sum(Finv_T * dF, axis=(-2, -1))
    B = F @ T.transpose(F)
    dB = dF @ T.transpose(F) + F @ T.transpose(dF)
    if case is CaseId.II:
        Jm23 = J ** (-2.0 / 3.0)
        I1 = T.trace(B)
        dev = B - (I1 / 3.0)[..., None, None] * T.I3
        ddev = dB - (T.trace(dB) / 3.0)[..., None, None] * T.I3
        dtau = (p.mu * Jm23)[..., None, None] * (ddev - (2.0 / 3.0) * a[..., None, None] * dev) \
            + (p.bulk * (2.0 * J - 1.0) * J * a)[..., None, None] * T.I3
    else:
        deps = T.dmat_func_sym(None, dB, T.HALF_LOG, eig=eig)
        sigma = tau / J[..., None, None]
        dtau = (J * a)[..., None, None] * sigma + J[..., None, None] * _hooke(deps, p)
    # d(F^-T) = -F^-T dF^T F^-T
    return dtau @ Finv_T - tau @ Finv_T @ T.transpose(dF) @ Finv_T


def _state(case, p, F):
    J = _jacobian(F)
    Finv_T = T.transpose(T.inv(F))
    tau = T.sym(_kirchhoff(case, p, F, J))
    eig = T.sym_eig(F @ T.transpose(F)) if case is CaseId.III else None
    return Finv_T, J, tau, eig


def dpk1(case, params: MaterialParams, F, dF):
    """Directional derivative ``dP/dF : dF`` (consistent linearization of pk1)."""
    case = CaseId.parse(case)
    F = np.asarray(F, dtype=float)
    dF = np.asarray(dF, dtype=float)
    if case is CaseId.I:
        return _hooke(T.sym(dF), params)
    return _dpk1(case, params, F, dF, *_state(case, params, F))


_UNIT = np.eye(9).reshape(9, 3, 3)


def tangent(case, params: MaterialParams, F):
    """Fourth-order tangent ``A[..., i, j, m, n] = dP_ij / dF_mn``."""
    case = CaseId.parse(case)
    F = np.asarray(F, dtype=float)
    lead = F.shape[:-2]
    if case is CaseId.I:
        A = (params.lam * np.einsum('ij,mn->ijmn', T.I3, T.I3)
             + params.mu * (np.einsum('im,jn->ijmn', T.I3, T.I3)
                            + np.einsum('in,jm->ijmn', T.I3, T.I3)))
        return np.broadcast_to(A, lead + (3, 3, 3, 3)).copy()
    Finv_T, J, tau, eig = _state(case, params, F)
    ex = lambda x: x[..., None, :, :]
    if eig is not None:
        eig = T.EigenSys(eig.values[..., None, :], eig.vectors[..., None, :, :])
    dP = _dpk1(case, params, ex(F), _UNIT, ex(Finv_T), J[..., None], ex(tau), eig)
    # dP[..., mn, i, j] -> A[..., i, j, m, n]
    dP = dP.reshape(lead + (3, 3, 3, 3))
    return np.moveaxis(dP, (-4, -3), (-2, -1))
