"""Linear, Newton and first-order incremental solvers for the MMS problems."""
import csv
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import List

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401  (sp.linalg.norm)
from scipy.sparse.linalg import cg, gmres

from ..constitutive import CaseId
from ..errors import LinearSolveFailure, NewtonDivergence
from .assembly import assemble_external, assemble_internal, assemble_tangent
from .mesh import Mesh

log = logging.getLogger(__name__)

STEPPING = ("converged", "first_order")
LOAD_MODES = ("lumped", "body")
RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    max_newton_iters: int = 25
    dt: float = 1.0
    stepping: str = "converged"
    load_mode: str = "lumped"
    linear_tol: float = 1e-12

    def __post_init__(self):
        if self.stepping not in STEPPING:
            raise ValueError(f"stepping must be one of {STEPPING}, got {self.stepping!r}")
        if self.load_mode not in LOAD_MODES:
            raise ValueError(f"load_mode must be one of {LOAD_MODES}, got {self.load_mode!r}")
        if not (self.rel_tol > 0 and self.linear_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")
        self.n_increments  # validates dt

    @property
    def n_increments(self):
        if not 0.0 < self.dt <= 1.0:
            raise ValueError(f"dt must lie in (0, 1], got {self.dt}")
        n = round(1.0 / self.dt)
        if abs(n * self.dt - 1.0) > 1e-9:
            raise ValueError(f"1/dt must be an integer, got dt = {self.dt}")
        return n

    def load_factors(self):
        n = self.n_increments
        return [k / n for k in range(1, n + 1)]


@dataclass
class Solution:
    """Nodal displacements (shape ``(n_nodes, 3)``) plus solver diagnostics.

    ``residual_history`` holds, per increment, the normalized residuals
    seen by the Newton loop (empty for linear and first-order solves).
    """
    mesh: Mesh
    u: np.ndarray
    residual_history: List[List[float]] = dc_field(default_factory=list)
    linear_iterations: int = 0

    @property
    def vector(self):
        return self.u.ravel()


def krylov_solve(K, b, tol, symmetric=True, maxiter=None, restarts=3):
    """Jacobi-preconditioned Krylov solve of ``K x = b``; returns (x, iterations).

    Conjugate gradients for symmetric ``K``, restarted GMRES otherwise. The
    iteration cap (default 20 sqrt(n)) is shared across restarts; a restart
    from the current iterate recovers accuracy when the recursive
    residual drifts from the true one. The solve is accepted when the true
    relative residual or the normwise backward error
    ``|r| / (|K| |x| + |b|)`` is below ``tol``; the latter covers right-hand
    sides so small that ``tol |b|`` sits under the round-off floor.
    """
    n = K.shape[0]
    if maxiter is None:
        maxiter = max(100, int(20 * math.sqrt(n)))
    if not np.any(b):
        return np.zeros(n), 0
    M = sp.diags(1.0 / K.diagonal())
    count = [0]

    def tick(_):
        count[0] += 1

    if symmetric:
        method = cg
    else:
        def method(*args, **kw):
            return gmres(*args, restart=60, callback_type="pr_norm", **kw)
        method.__name__ = "gmres"
    bn = np.linalg.norm(b)
    Kn = sp.linalg.norm(K, np.inf)
    x = None
    for _ in range(restarts + 1):
        x, _info = method(K, b, x0=x, rtol=tol, atol=0.0, maxiter=maxiter - count[0],
                          M=M, callback=tick)
        rn = np.linalg.norm(b - K @ x)
        res = rn / bn
        backward = rn / (Kn * np.linalg.norm(x) + bn)
        if res <= tol or backward <= tol or count[0] >= maxiter:
            break
    if res > tol and backward > tol:
        raise LinearSolveFailure(
            f"{method.__name__} did not reach relative residual {tol:.1e} in {count[0]} "
            f"iterations (reached {res:.2e})")
    return x, count[0]


def _tangent_solve(mesh, u, case, params, rhs, tol):
    # Case III has a non-symmetric consistent tangent
    K = assemble_tangent(mesh, u, case, params)
    return krylov_solve(K, rhs, tol, symmetric=case is not CaseId.III)


def _finish(mesh, u):
    u = u.reshape(mesh.n_nodes, 3).copy()
    u[mesh.boundary_nodes] = 0.0
    return u


def solve_linear(mesh: Mesh, params, field, cfg: SolverConfig, source_case=None) -> Solution:
    """Small-strain solve ``K u = f_ext(1)`` (Case I model)."""
    source_case = CaseId.I if source_case is None else CaseId.parse(source_case)
    f = assemble_external(mesh, field, source_case, params, cfg.load_mode)
    u, its = _tangent_solve(mesh, np.zeros(mesh.n_dofs), CaseId.I, params, f, cfg.linear_tol)
    return Solution(mesh, _finish(mesh, u), linear_iterations=its)


def _residual_norm(r, mesh):
    r = r.copy()
    r[mesh.boundary_mask] = 0.0
    return r, np.linalg.norm(r)


def solve_newton(mesh: Mesh, case, params, field, cfg: SolverConfig, source_case=None) -> Solution:
    """Incremental Newton-Raphson solve, equilibrated at every t_k = k dt.

    An increment is converged when ``|f_ext - f_int| <= max(rel_tol |f_ext|, 1e-12)``
    over the free dofs; the history records residuals normalized by
    ``max(|f_ext|, 1e-12)``.
    """
    case = CaseId.parse(case)
    source_case = case if source_case is None else CaseId.parse(source_case)
    f_full = assemble_external(mesh, field, source_case, params, cfg.load_mode)
    u = np.zeros(mesh.n_dofs)
    history = []
    its_total = 0
    for t in cfg.load_factors():
        f_ext = t * f_full
        scale = max(np.linalg.norm(f_ext), RESIDUAL_FLOOR)
        # the floor is also an absolute tolerance: loads that are pure
        # round-off cannot be equilibrated to rel_tol of themselves
        tol = max(cfg.rel_tol * np.linalg.norm(f_ext), RESIDUAL_FLOOR)
        hist = []
        for _ in range(cfg.max_newton_iters + 1):
            r, rn = _residual_norm(f_ext - assemble_internal(mesh, u, case, params), mesh)
            hist.append(rn / scale)
            if rn <= tol:
                break
            if len(hist) > cfg.max_newton_iters:
                raise NewtonDivergence(
                    f"Newton did not converge at t = {t:g} after {cfg.max_newton_iters} "
                    f"iterations (residual {hist[-1]:.2e})", t=t, history=hist)
            du, its = _tangent_solve(mesh, u, case, params, r, cfg.linear_tol)
            its_total += its
            u += du
        log.debug("t=%g newton residuals %s", t, hist)
        history.append(hist)
    return Solution(mesh, _finish(mesh, u), history, its_total)


def solve_first_order(mesh: Mesh, case, params, field, cfg: SolverConfig, source_case=None) -> Solution:
    """Forward incremental scheme: one tangent solve per increment, no iterations.

    Each increment solves ``K(u_k) du = f_ext(t_{k+1}) - f_ext(t_k)`` from
    the start-of-increment state; the drift from equilibrium is never
    corrected, so the path error is first order in dt. The Case I model
    is linear and reduces to :func:`solve_linear`.
    """
    case = CaseId.parse(case)
    source_case = case if source_case is None else CaseId.parse(source_case)
    if case is CaseId.I:
        return solve_linear(mesh, params, field, cfg, source_case)
    f_full = assemble_external(mesh, field, source_case, params, cfg.load_mode)
    n = cfg.n_increments
    u = np.zeros(mesh.n_dofs)
    its_total = 0
    for k in range(n):
        df = (k + 1) / n * f_full - k / n * f_full
        du, its = _tangent_solve(mesh, u, case, params, df, cfg.linear_tol)
        its_total += its
        u += du
    return Solution(mesh, _finish(mesh, u), linear_iterations=its_total)


def solve(mesh: Mesh, case, params, field, cfg: SolverConfig, source_case=None) -> Solution:
    """Dispatch on the model case and stepping mode."""
    case = CaseId.parse(case)
    if cfg.stepping == "first_order":
        return solve_first_order(mesh, case, params, field, cfg, source_case)
    if case is CaseId.I:
        return solve_linear(mesh, params, field, cfg, source_case)
    return solve_newton(mesh, case, params, field, cfg, source_case)


SOLUTION_CSV_HEADER = ("node_id", "X", "Y", "Z", "ux", "uy", "uz")


def write_solution_csv(out, solution: Solution):
    """Snapshot ``node_id,X,Y,Z,ux,uy,uz`` with 1-based node ids."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SOLUTION_CSV_HEADER)
    for i, (X, u) in enumerate(zip(solution.mesh.nodes, solution.u), start=1):
        w.writerow([i] + [repr(float(v)) for v in (*X, *u)])
    return solution.mesh.n_nodes
