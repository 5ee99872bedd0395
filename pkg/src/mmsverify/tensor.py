"""
Small dense 3D tensor algebra.

Every function accepts a single tensor of shape ``(3, 3)`` or a stack of
shape ``(..., 3, 3)`` and broadcasts over the leading axes. Symmetric
tensors are stored as full ``3x3`` arrays; functions that produce a
symmetric result symmetrize it explicitly so the symmetry is exact.

Matrix functions of symmetric tensors go through the spectral
decomposition, and their directional derivatives use the Daleckii-Krein
divided-difference formula in the eigenbasis.
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import NonFiniteInput, NonPositiveEigenvalue, SingularMatrix

I3 = np.eye(3)

# |lambda_i - lambda_j| <= REPEATED_TOL * max(1, |lambda|max) uses f' instead
# of the divided difference.
REPEATED_TOL = 1e-8
# Smallest admissible eigenvalue (relative) for functions needing positivity.
POSITIVE_TOL = 1e-14
INV_DET_TOL = 1e-14


class EigenSys(NamedTuple):
    """Eigenvalues in descending order and eigenvectors stored as columns."""
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class ScalarFunction:
    """A scalar function together with its derivative.

    ``positive`` marks functions that are only defined for a strictly
    positive spectrum (log, sqrt).
    """
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    positive: bool = False


LOG = ScalarFunction("log", np.log, lambda x: 1.0 / x, positive=True)
HALF_LOG = ScalarFunction("half_log", lambda x: 0.5 * np.log(x),
                          lambda x: 0.5 / x, positive=True)
SQRT = ScalarFunction("sqrt", np.sqrt, lambda x: 0.5 / np.sqrt(x), positive=True)
EXP = ScalarFunction("exp", np.exp, np.exp)
SQUARE = ScalarFunction("square", np.square, lambda x: 2.0 * x)

FUNCTIONS = {fn.name: fn for fn in (LOG, HALF_LOG, SQRT, EXP, SQUARE)}

FunctionLike = Union[str, ScalarFunction]


def _as_function(f: FunctionLike) -> ScalarFunction:
    if isinstance(f, ScalarFunction):
        return f
    try:
        return FUNCTIONS[f]
    except KeyError:
        raise ValueError(f"unknown matrix function {f!r}; "
                         f"choose from {sorted(FUNCTIONS)}") from None


def _check_finite(A):
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NonFiniteInput("tensor has non-finite entries")
    return A


def sym(A):
    """Symmetric part of ``A``."""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def transpose(A):
    return np.swapaxes(np.asarray(A, dtype=float), -1, -2)


def trace(A):
    return np.trace(np.asarray(A, dtype=float), axis1=-2, axis2=-1)


def matmul(A, B):
    return np.matmul(A, B)


def det(A):
    """Determinant by cofactor expansion (exact for the 3x3 layout)."""
    A = np.asarray(A, dtype=float)
    return (A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
            - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
            + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0]))


def cofactor(A):
    """Cofactor matrix, ``cof(A) = det(A) A^{-T}``."""
    A = np.asarray(A, dtype=float)
    C = np.empty(A.shape)
    C[..., 0, 0] = A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1]
    C[..., 0, 1] = A[..., 1, 2] * A[..., 2, 0] - A[..., 1, 0] * A[..., 2, 2]
    C[..., 0, 2] = A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0]
    C[..., 1, 0] = A[..., 0, 2] * A[..., 2, 1] - A[..., 0, 1] * A[..., 2, 2]
    C[..., 1, 1] = A[..., 0, 0] * A[..., 2, 2] - A[..., 0, 2] * A[..., 2, 0]
    C[..., 1, 2] = A[..., 0, 1] * A[..., 2, 0] - A[..., 0, 0] * A[..., 2, 1]
    C[..., 2, 0] = A[..., 0, 1] * A[..., 1, 2] - A[..., 0, 2] * A[..., 1, 1]
    C[..., 2, 1] = A[..., 0, 2] * A[..., 1, 0] - A[..., 0, 0] * A[..., 1, 2]
    C[..., 2, 2] = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    return C


def inv(A):
    """Inverse via the adjugate; raises SingularMatrix for |det| < 1e-14."""
    A = _check_finite(A)
    d = det(A)
    if np.any(np.abs(d) < INV_DET_TOL):
        raise SingularMatrix(f"matrix is singular (|det| = {np.min(np.abs(d)):.3e})")
    return transpose(cofactor(A)) / d[..., None, None]


def sym_eig(A) -> EigenSys:
    """Spectral decomposition of a symmetric tensor.

    Parameters
    ----------
    A : array_like, shape (..., 3, 3)
        Symmetric tensor(s). Only the symmetric part is used.

    Returns
    -------
    EigenSys
        ``values`` sorted in descending order, ``vectors`` with the
        matching orthonormal eigenvectors as columns, so that
        ``A = Q diag(values) Q^T``.
    """
    A = sym(_check_finite(A))
    w, Q = np.linalg.eigh(A)
    return EigenSys(w[..., ::-1], Q[..., ::-1])


def _compose(Q, d):
    return sym((Q * d[..., None, :]) @ transpose(Q))


def _check_spectrum(w, fn):
    if fn.positive:
        scale = np.maximum(1.0, np.max(np.abs(w), axis=-1))
        if np.any(w[..., -1] <= POSITIVE_TOL * scale):
            raise NonPositiveEigenvalue(
                f"{fn.name} needs a positive spectrum; "
                f"smallest eigenvalue {np.min(w[..., -1]):.3e}")


def mat_func_sym(A, f: FunctionLike):
    """Isotropic matrix function ``Q diag(f(lambda)) Q^T``.

    ``f`` is a :class:`ScalarFunction` or one of the names in
    :data:`FUNCTIONS` (``'log'``, ``'sqrt'``, ``'exp'``, ...).
    """
    fn = _as_function(f)
    w, Q = sym_eig(A)
    _check_spectrum(w, fn)
    return _compose(Q, fn.f(w))


def divided_differences(w, fn: ScalarFunction):
    """First divided differences ``f[l_i, l_j]`` of ``fn`` at eigenvalues ``w``.

    The diagonal and near-repeated pairs use the derivative at the
    midpoint.
    """
    li = w[..., :, None]
    lj = w[..., None, :]
    gap = li - lj
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1))[..., None, None]
    close = np.abs(gap) <= REPEATED_TOL * scale
    fw = fn.f(w)
    num = fw[..., :, None] - fw[..., None, :]
    safe_gap = np.where(close, 1.0, gap)
    return np.where(close, fn.df(0.5 * (li + lj)), num / safe_gap)


def dmat_func_sym(A, H, f: FunctionLike, eig: EigenSys = None):
    """Directional derivative ``D f(A)[H]`` of an isotropic matrix function.

    Uses the Daleckii-Krein formula::

        D f(A)[H] = Q (f[l_i, l_j] o (Q^T H Q)) Q^T

    where ``o`` is the entrywise product. ``H`` must be symmetric (only its
    symmetric part is used) and broadcasts against ``A``. A precomputed
    ``eig = sym_eig(A)`` may be passed to skip the decomposition; ``A`` is
    then ignored.
    """
    fn = _as_function(f)
    w, Q = sym_eig(A) if eig is None else eig
    _check_spectrum(w, fn)
    G = divided_differences(w, fn)
    Hq = transpose(Q) @ sym(H) @ Q
    return sym(Q @ (G * Hq) @ transpose(Q))
