"""
Error norms, observed orders of convergence and the refinement studies.

A grid study solves the same manufactured problem on a sequence of meshes
refined by r = 2 and reports the observed order of convergence (OOC) of the
nodal displacement error for each successive pair. An increment study
holds the mesh fixed, refines the pseudo-time increment, and reports the
rate p at which the increment error vanishes from consecutive triplets.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field as dc_field, replace
from typing import List, Optional, Sequence

import numpy as np

from .constitutive import REFERENCE_MATERIAL, CaseId, MaterialParams
from .errors import DegenerateTriplet, MmsError, NonPositiveNorm
from .fem import SolverConfig, build_mesh, solve
from .manufactured import REFERENCE_FIELD, MmsField

log = logging.getLogger(__name__)

OOC_THEORY = 2.0
OOC_BAND = (1.9, 2.1)
P_THEORY = 1.0
P_BAND = (0.85, 1.15)
DEFAULT_LEVELS = (4, 8, 16, 32)
DEFAULT_DTS = (0.2, 0.1, 0.05, 0.025)
# Relative size of L_m - L_f below which a triplet carries no increment error.
DEGENERATE_TOL = 1e-10


@dataclass(frozen=True)
class NormPair:
    """Spatially averaged L2 and max norms of the normalized nodal error."""
    l2: float
    linf: float

    def __iter__(self):
        yield self.l2
        yield self.linf


@dataclass(frozen=True)
class CasePairing:
    """Constitutive model used by the solver and the case whose source is applied."""
    model_case: CaseId
    source_case: CaseId

    @classmethod
    def matched(cls, case):
        case = CaseId.parse(case)
        return cls(case, case)

    @classmethod
    def of(cls, model_case, source_case=None):
        model_case = CaseId.parse(model_case)
        source_case = model_case if source_case is None else CaseId.parse(source_case)
        return cls(model_case, source_case)

    @property
    def is_matched(self):
        return self.model_case is self.source_case

    @property
    def label(self):
        if self.is_matched:
            return f"case {self.model_case}"
        return f"model {self.model_case} / source {self.source_case}"


def error_norms(mesh, u_num, field: MmsField) -> NormPair:
    """L2 and L-infinity norms of the per-node error magnitude.

    Each node contributes ``|u_num - u_mms| / (sqrt(3) C1)``; the L2 norm is
    the root mean square over all nodes, boundary nodes included.
    """
    u_num = np.asarray(getattr(u_num, "u", u_num), dtype=float).reshape(mesh.n_nodes, 3)
    e = np.linalg.norm(u_num - field.displacement(mesh.nodes), axis=1) / field.max_magnitude
    return NormPair(float(np.sqrt(np.mean(e * e))), float(np.max(e)))


def ooc(L_coarse, L_fine, r=2.0):
    """Observed order of convergence ln(L_c / L_f) / ln r."""
    if not (L_coarse > 0 and L_fine > 0):
        raise NonPositiveNorm(f"norms must be positive, got {L_coarse} and {L_fine}")
    if not r > 1:
        raise ValueError(f"refinement ratio must exceed 1, got {r}")
    return math.log(L_coarse / L_fine) / math.log(r)


def increment_p(L_c, L_m, L_f, r_inc=2.0):
    """Convergence rate toward a finite asymptote from a coarse/medium/fine triplet."""
    if not r_inc > 1:
        raise ValueError(f"refinement ratio must exceed 1, got {r_inc}")
    d1 = L_c - L_m
    d2 = L_m - L_f
    scale = max(abs(L_c), abs(L_m), abs(L_f))
    if abs(d2) <= DEGENERATE_TOL * scale or abs(d1) <= DEGENERATE_TOL * scale:
        raise DegenerateTriplet(
            f"norm differences ({d1:.3e}, {d2:.3e}) are below the noise floor")
    if (d1 > 0) != (d2 > 0):
        raise DegenerateTriplet(f"norm differences change sign ({d1:.3e}, {d2:.3e})")
    return math.log(d1 / d2) / math.log(r_inc)


@dataclass
class StudyRow:
    level: float          # N for grid studies, dt for increment studies
    h: float
    norms: NormPair


@dataclass
class StudyTable:
    """Per-level error norms with derived OOC (grid) or p (increment) entries."""
    kind: str                       # "grid" or "increment"
    pairing: CasePairing
    cfg: SolverConfig
    rows: List[StudyRow] = dc_field(default_factory=list)
    ratio: float = 2.0

    def ooc_pairs(self):
        """OOC per successive pair as ``[(l2, linf), ...]``; None where a norm is zero."""
        out = []
        for c, f in zip(self.rows, self.rows[1:]):
            pair = []
            for a, b in zip(c.norms, f.norms):
                try:
                    pair.append(ooc(a, b, self.ratio))
                except NonPositiveNorm:
                    pair.append(None)
            out.append(tuple(pair))
        return out

    def triplets(self):
        """``[(label, p_l2 or None, p_linf or None), ...]``; None marks a degenerate triplet."""
        out = []
        for c, m, f in zip(self.rows, self.rows[1:], self.rows[2:]):
            label = "-".join(_fmt_level(r.level) for r in (c, m, f))
            ps = []
            for Lc, Lm, Lf in zip(c.norms, m.norms, f.norms):
                try:
                    ps.append(increment_p(Lc, Lm, Lf, self.ratio))
                except DegenerateTriplet:
                    ps.append(None)
            out.append((label, *ps))
        return out

    def finest_ooc(self):
        pairs = self.ooc_pairs()
        return pairs[-1] if pairs else None

    def passed(self):
        """Built-in acceptance band: finest-pair OOC (grid) or every p (increment)."""
        if self.kind == "grid":
            last = self.finest_ooc()
            return last is not None and all(_in_band(v, OOC_BAND) for v in last)
        trip = self.triplets()
        return bool(trip) and all(_in_band(p, P_BAND) for _, *ps in trip for p in ps)


def _in_band(v, band):
    return v is not None and band[0] <= v <= band[1]


def _fmt_level(x):
    return str(int(x)) if float(x).is_integer() and x >= 1 else repr(float(x))


def _check_ratio(values, name):
    values = list(values)
    if len(values) < 2:
        return 2.0
    r = values[0] / values[1] if name == "dts" else values[1] / values[0]
    for a, b in zip(values, values[1:]):
        step = a / b if name == "dts" else b / a
        if not r > 1 or abs(step - r) > 1e-9 * r:
            raise ValueError(f"{name} must be a geometric sequence with constant ratio > 1")
    return r


def run_grid_study(pairing: CasePairing, cfg: SolverConfig, levels: Sequence[int] = DEFAULT_LEVELS,
                   params: MaterialParams = REFERENCE_MATERIAL, field: MmsField = REFERENCE_FIELD) -> StudyTable:
    """Solve on each mesh level and tabulate norms and OOC."""
    levels = [int(N) for N in levels]
    if any(N < 2 or N & (N - 1) for N in levels) or levels != sorted(set(levels)):
        raise ValueError(f"levels must be ascending powers of 2, got {levels}")
    ratio = _check_ratio(levels, "levels")
    table = StudyTable("grid", pairing, cfg, ratio=ratio)
    for N in levels:
        mesh = build_mesh(N)
        try:
            sol = solve(mesh, pairing.model_case, params, field, cfg, pairing.source_case)
        except MmsError as err:
            err.level = N
            err.args = (f"N={N}: {err.args[0] if err.args else err}",) + err.args[1:]
            raise
        norms = error_norms(mesh, sol, field)
        log.info("%s N=%d L2=%.6e Linf=%.6e", pairing.label, N, norms.l2, norms.linf)
        table.rows.append(StudyRow(N, mesh.h, norms))
    return table


def run_increment_study(case, cfg: SolverConfig, dts: Sequence[float] = DEFAULT_DTS, N: int = 4,
                        params: MaterialParams = REFERENCE_MATERIAL, field: MmsField = REFERENCE_FIELD,
                        source_case=None) -> StudyTable:
    """Fixed-mesh study over a halving sequence of pseudo-time increments."""
    pairing = CasePairing.of(case, source_case)
    dts = [float(d) for d in dts]
    ratio = _check_ratio(dts, "dts")
    mesh = build_mesh(N)
    table = StudyTable("increment", pairing, cfg, ratio=ratio)
    for dt in dts:
        run_cfg = replace(cfg, dt=dt)
        try:
            sol = solve(mesh, pairing.model_case, params, field, run_cfg, pairing.source_case)
        except MmsError as err:
            err.args = (f"dt={dt:g}: {err.args[0] if err.args else err}",) + err.args[1:]
            raise
        norms = error_norms(mesh, sol, field)
        log.info("%s dt=%g L2=%.6e Linf=%.6e", pairing.label, dt, norms.l2, norms.linf)
        table.rows.append(StudyRow(dt, mesh.h, norms))
    return table


GRID_CSV_HEADER = ("N", "h", "L2", "Linf", "OOC_L2", "OOC_Linf")
INCREMENT_CSV_HEADER = ("dt", "L2", "Linf", "triplet", "p_L2", "p_Linf")


def _num(x):
    return "" if x is None else repr(float(x))


def table_csv(table: Optional[StudyTable], kind="grid"):
    """CSV text for a study; an empty or missing table gives the header only."""
    kind = table.kind if table is not None else kind
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = table.rows if table is not None else []
    if kind == "grid":
        w.writerow(GRID_CSV_HEADER)
        pairs = table.ooc_pairs() if rows else []
        for i, row in enumerate(rows):
            o = pairs[i - 1] if i > 0 else ()
            cells = [_num(v) if v is not None else "undefined" for v in o] if i > 0 else ["", ""]
            w.writerow([int(row.level), _num(row.h), _num(row.norms.l2), _num(row.norms.linf), *cells])
    else:
        w.writerow(INCREMENT_CSV_HEADER)
        trip = table.triplets() if rows else []
        for i, row in enumerate(rows):
            label, p2, pinf = trip[i - 2] if i >= 2 else ("", None, None)
            cells = [_num(row.level), _num(row.norms.l2), _num(row.norms.linf), label]
            if i >= 2:
                cells += [_num(p2) if p2 is not None else "degenerate",
                          _num(pinf) if pinf is not None else "degenerate"]
            else:
                cells += ["", ""]
            w.writerow(cells)
    return buf.getvalue()


def table_summary(table: StudyTable):
    """Human-readable comparison against the theoretical OOC = 2 or p = 1."""
    lines = []
    if table.kind == "grid":
        lines.append(f"Grid refinement, {table.pairing.label}, load={table.cfg.load_mode}, "
                     f"theoretical OOC = {OOC_THEORY:g}")
        lines.append(f"{'grid pair':>14}  {'OOC L2':>8}  {'OOC Linf':>8}")
        pairs = table.ooc_pairs()
        for k, (a, b) in enumerate(pairs):
            c, f = table.rows[k], table.rows[k + 1]
            tag = ""
            if k == len(pairs) - 1:
                ok = _in_band(a, OOC_BAND) and _in_band(b, OOC_BAND)
                tag = f"  {'PASS' if ok else 'FAIL'} [{OOC_BAND[0]}, {OOC_BAND[1]}]"
            cells = "  ".join(f"{v:8.3f}" if v is not None else "   undef" for v in (a, b))
            lines.append(f"{int(c.level)}^3 to {int(f.level)}^3".rjust(14) + f"  {cells}{tag}")
    else:
        lines.append(f"Increment refinement, {table.pairing.label}, N={round(1 / table.rows[0].h)}, "
                     f"stepping={table.cfg.stepping}, theoretical p = {P_THEORY:g}")
        lines.append(f"{'increment size triplet':>24}  {'p L2':>8}  {'p Linf':>8}")
        for label, p2, pinf in table.triplets():
            cells = [f"{p:8.3f}" if p is not None else "  degen." for p in (p2, pinf)]
            ok = _in_band(p2, P_BAND) and _in_band(pinf, P_BAND)
            lines.append(f"{label:>24}  {cells[0]}  {cells[1]}  {'PASS' if ok else 'FAIL'}")
    lines.append(f"overall: {'PASS' if table.passed() else 'FAIL'}")
    return "\n".join(lines) + "\n"


def report(tables):
    """Return ``(summary_text, [csv_text, ...])`` for one table or a list of tables."""
    if isinstance(tables, StudyTable) or tables is None:
        tables = [tables]
    csvs = [table_csv(t) for t in tables]
    summary = "".join(table_summary(t) for t in tables if t is not None and t.rows)
    return summary, csvs
