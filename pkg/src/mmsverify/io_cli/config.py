"""
Plain-text run configuration: ``key = value`` lines with ``#`` comments.

Example::

    # model III driven by the Case II source
    case = III
    source_case = II
    load_mode = body
    levels = 4, 8, 16, 32
"""
from dataclasses import asdict, dataclass, replace
from typing import Optional, Tuple

from ..constitutive import CaseId, from_lame
from ..errors import ConfigParseError, ConfigValidationError, MmsError
from ..fem import SolverConfig
from ..fem.solvers import LOAD_MODES, STEPPING
from ..manufactured import MmsField
from ..verify import DEFAULT_DTS, DEFAULT_LEVELS


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; defaults are the reference constants."""
    case: CaseId = CaseId.I
    source_case: Optional[CaseId] = None
    levels: Tuple[int, ...] = DEFAULT_LEVELS
    dts: Tuple[float, ...] = DEFAULT_DTS
    N: int = 4
    dt: float = 1.0
    load_mode: str = "lumped"
    stepping: str = "converged"
    output_dir: str = "mms_output"
    lam: float = 100.0
    mu: float = 50.0
    C1: float = 0.01
    n: int = 2
    rel_tol: float = 1e-10
    max_newton_iters: int = 25
    linear_tol: float = 1e-12

    def __post_init__(self):
        if self.source_case is None:
            object.__setattr__(self, "source_case", self.case)

    @property
    def params(self):
        return from_lame(self.lam, self.mu)

    @property
    def field(self):
        return MmsField(self.C1, self.n)

    def solver_config(self, **overrides):
        cfg = SolverConfig(rel_tol=self.rel_tol, max_newton_iters=self.max_newton_iters,
                           dt=self.dt, stepping=self.stepping, load_mode=self.load_mode,
                           linear_tol=self.linear_tol)
        return replace(cfg, **overrides) if overrides else cfg

    def validate(self):
        """Check every precondition the solvers will rely on; returns self."""
        try:
            self.params
            self.field
            self.solver_config()
        except (MmsError, ValueError) as err:
            raise ConfigValidationError(str(err)) from err
        # Run configurations are limited to non-auxetic materials (nu >= 0).
        if self.lam < 0:
            raise ConfigValidationError(f"lambda must be non-negative, got {self.lam}")
        if self.load_mode not in LOAD_MODES:
            raise ConfigValidationError(f"load_mode must be one of {LOAD_MODES}")
        if self.stepping not in STEPPING:
            raise ConfigValidationError(f"stepping must be one of {STEPPING}")
        levels = list(self.levels)
        if not levels or any(N < 2 or N & (N - 1) for N in levels) or levels != sorted(set(levels)):
            raise ConfigValidationError(f"levels must be ascending powers of 2, got {levels}")
        dts = list(self.dts)
        if not dts or any(not 0 < d <= 1 for d in dts) or dts != sorted(set(dts), reverse=True):
            raise ConfigValidationError(f"dts must be strictly decreasing values in (0, 1], got {dts}")
        for d in dts:
            try:
                replace(self.solver_config(), dt=d)
            except ValueError as err:
                raise ConfigValidationError(str(err)) from err
        if self.N < 2:
            raise ConfigValidationError(f"N must be at least 2, got {self.N}")
        return self

    def to_dict(self):
        d = asdict(self)
        d["case"] = str(self.case)
        d["source_case"] = str(self.source_case)
        d["levels"] = list(self.levels)
        d["dts"] = list(self.dts)
        return d


def _int_list(s):
    return tuple(int(v) for v in s.split(",") if v.strip())


def _float_list(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


# config key -> (RunConfig field, converter)
KEYS = {
    "case": ("case", CaseId.parse),
    "source_case": ("source_case", CaseId.parse),
    "levels": ("levels", _int_list),
    "dts": ("dts", _float_list),
    "n_elements": ("N", int),
    "N": ("N", int),
    "dt": ("dt", float),
    "load_mode": ("load_mode", str),
    "stepping": ("stepping", str),
    "output_dir": ("output_dir", str),
    "lambda": ("lam", float),
    "mu": ("mu", float),
    "C1": ("C1", float),
    "n": ("n", int),
    "rel_tol": ("rel_tol", float),
    "max_newton_iters": ("max_newton_iters", int),
    "linear_tol": ("linear_tol", float),
}


def parse_config(text, base: RunConfig = None) -> RunConfig:
    """Parse configuration text on top of ``base`` (defaults if omitted)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        name, conv = KEYS[key]
        if name in values:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        try:
            values[name] = conv(value)
        except (ValueError, MmsError) as err:
            raise ConfigParseError(f"bad value for {key!r}: {err}", lineno) from err
    base = base or RunConfig()
    if "case" in values and "source_case" not in values:
        values["source_case"] = values["case"]
    return replace(base, **values).validate()


def load_config(path) -> RunConfig:
    """Read and validate a configuration file."""
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
