"""
Command-line front end.

Exit codes: 0 success or PASS, 1 a study fell outside its acceptance band,
2 usage or configuration error, 3 solver or numerical error.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..constitutive import CaseId
from ..errors import ConfigParseError, ConfigValidationError, MmsError
from ..fem import build_mesh, solve, write_solution_csv
from ..manufactured import case1_closed_form, oracle_source, plane_points, source, write_field_csv
from ..verify import CasePairing, error_norms, report, run_grid_study, run_increment_study
from .config import RunConfig, load_config
from .deck import DeckSpec, export_deck

OUTPUT_DIR_ENV = "MMSVERIFY_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("mmsverify")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _point(s):
    try:
        vals = tuple(float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,Z, got {s!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three coordinates, got {s!r}")
    return vals


def _int_list(s):
    try:
        return tuple(int(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _float_list(s):
    try:
        return tuple(float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _case(s):
    try:
        return CaseId.parse(s)
    except (ValueError, MmsError) as err:
        raise argparse.ArgumentTypeError(str(err))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--case", type=_case, help="constitutive case: I, II or III")
    common.add_argument("--source-case", type=_case, help="case whose source term is applied")
    common.add_argument("--lambda", dest="lam", type=float, help="first Lame constant")
    common.add_argument("--mu", type=float, help="shear modulus")
    common.add_argument("--C1", type=float, help="manufactured amplitude")
    common.add_argument("--n", type=int, help="manufactured wave number")
    common.add_argument("--out", dest="output_dir",
                        help=f"output directory (else ${OUTPUT_DIR_ENV}, else config)")
    common.add_argument("-v", "--verbose", action="store_true")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--load", dest="load_mode", choices=("lumped", "body"))
    solver.add_argument("--stepping", choices=("converged", "first_order"))
    solver.add_argument("--rel-tol", dest="rel_tol", type=float)

    p = _Parser(prog="mmsverify", description="Manufactured-solution verification of "
                "elastostatic finite element solutions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    s = sub.add_parser("source", parents=[common], help="evaluate the source term at a point")
    s.add_argument("--at", type=_point, required=True, metavar="X,Y,Z")
    s.add_argument("--check", action="store_true",
                   help="also print the finite-difference oracle (and closed form for case I)")

    s = sub.add_parser("solve", parents=[common, solver], help="solve on one mesh")
    s.add_argument("--N", type=int, help="elements per side")
    s.add_argument("--dt", type=float, help="pseudo-time increment")

    s = sub.add_parser("study-grid", parents=[common, solver], help="grid refinement study")
    s.add_argument("--levels", type=_int_list, metavar="N1,N2,...")
    s.add_argument("--fine", action="store_true", help="append the 64^3 level")

    s = sub.add_parser("study-increment", parents=[common, solver],
                       help="pseudo-time increment refinement study")
    s.add_argument("--dts", type=_float_list, metavar="DT1,DT2,...")
    s.add_argument("--N", type=int, help="elements per side")

    s = sub.add_parser("export-deck", parents=[common], help="write a CLOAD deck or DLOAD table")
    s.add_argument("--N", type=int, help="elements per side")
    s.add_argument("--kind", choices=("cload", "dload"), default="cload")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--nlgeom", dest="nlgeom", action="store_true", default=None)
    g.add_argument("--no-nlgeom", dest="nlgeom", action="store_false")
    s.add_argument("--precision", type=int, default=16, help="significant digits")
    s.add_argument("--emit-zeros", action="store_true")

    s = sub.add_parser("export-field", parents=[common], help="write the source field on a z-plane")
    s.add_argument("--N", type=int, help="samples per side")
    s.add_argument("--z", type=float, default=0.5, help="plane height")
    return p


_OVERRIDES = ("case", "source_case", "lam", "mu", "C1", "n", "load_mode", "stepping",
              "rel_tol", "N", "dt", "levels", "dts")


def resolve_config(args, env=None) -> RunConfig:
    """Config file, then command-line flags; output directory flag > environment > file."""
    env = os.environ if env is None else env
    cfg = load_config(args.config) if args.config else RunConfig()
    values = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}
    if "case" in values and "source_case" not in values:
        values["source_case"] = values["case"]
    if getattr(args, "fine", False):
        values["levels"] = tuple(values.get("levels", cfg.levels)) + (64,)
    if args.command == "study-increment" and "stepping" not in values:
        values["stepping"] = "first_order"
    if args.output_dir:
        values["output_dir"] = args.output_dir
    elif env.get(OUTPUT_DIR_ENV):
        values["output_dir"] = env[OUTPUT_DIR_ENV]
    return replace(cfg, **values).validate()


def write_manifest(out_dir: Path, cfg: RunConfig, command, argv, extra=None):
    manifest = {
        "artifact": "mmsverify",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "config": cfg.to_dict(),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _fmt_vec(v):
    return " ".join(f"{x:.10g}" for x in v)


def cmd_source(args, cfg, out_dir):
    X = np.array(args.at, dtype=float)
    ev = source(cfg.source_case, cfg.params, cfg.field, X)
    print(_fmt_vec(ev.phi))
    if args.check:
        print("oracle", _fmt_vec(oracle_source(cfg.source_case, cfg.params, cfg.field, X)))
        if cfg.source_case is CaseId.I and cfg.field.C1 == 0.01 and cfg.field.n == 2 \
                and (cfg.lam, cfg.mu) == (100.0, 50.0):
            print("closed-form", _fmt_vec(case1_closed_form(X)))
    return EXIT_OK, {}


def cmd_solve(args, cfg, out_dir):
    mesh = build_mesh(cfg.N)
    sol = solve(mesh, cfg.case, cfg.params, cfg.field, cfg.solver_config(), cfg.source_case)
    norms = error_norms(mesh, sol, cfg.field)
    path = out_dir / f"solution_case{cfg.case}_N{cfg.N}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_solution_csv(fh, sol)
    print(f"N={cfg.N} L2={norms.l2:.6e} Linf={norms.linf:.6e}")
    print(f"wrote {path}")
    return EXIT_OK, {"L2": norms.l2, "Linf": norms.linf}


def _write_study(table, out_dir, stem):
    summary, (csv_text,) = report(table)
    (out_dir / f"{stem}.csv").write_text(csv_text, encoding="utf-8")
    (out_dir / f"{stem}_summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(csv_text)
    sys.stdout.write(summary)
    return EXIT_OK if table.passed() else EXIT_FAIL


def cmd_study_grid(args, cfg, out_dir):
    pairing = CasePairing(cfg.case, cfg.source_case)
    table = run_grid_study(pairing, cfg.solver_config(), cfg.levels, cfg.params, cfg.field)
    stem = f"grid_model{cfg.case}_source{cfg.source_case}_{cfg.load_mode}"
    return _write_study(table, out_dir, stem), {"passed": table.passed()}


def cmd_study_increment(args, cfg, out_dir):
    table = run_increment_study(cfg.case, cfg.solver_config(), cfg.dts, cfg.N, cfg.params,
                                cfg.field, cfg.source_case)
    stem = f"increment_case{cfg.case}_N{cfg.N}_{cfg.stepping}"
    return _write_study(table, out_dir, stem), {"passed": table.passed()}


def cmd_export_deck(args, cfg, out_dir):
    spec = DeckSpec(cfg.N, args.kind, cfg.source_case, args.nlgeom, args.precision,
                    args.emit_zeros, cfg.params, cfg.field)
    ext = "inp" if args.kind == "cload" else "csv"
    path = out_dir / f"{args.kind}_case{spec.case}_N{spec.N}.{ext}"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        count = export_deck(spec, fh)
    print(f"wrote {count} lines to {path}")
    return EXIT_OK, {"lines": count, "nlgeom": spec.nlgeom}


def cmd_export_field(args, cfg, out_dir):
    X = plane_points(cfg.N, args.z)
    path = out_dir / f"field_case{cfg.source_case}_N{cfg.N}_z{args.z:g}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        count = write_field_csv(fh, cfg.source_case, cfg.params, cfg.field, X)
    print(f"wrote {count} rows to {path}")
    return EXIT_OK, {"rows": count}


COMMANDS = {
    "source": cmd_source,
    "solve": cmd_solve,
    "study-grid": cmd_study_grid,
    "study-increment": cmd_study_increment,
    "export-deck": cmd_export_deck,
    "export-field": cmd_export_field,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = resolve_config(args)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigParseError, ConfigValidationError, OSError) as err:
        print(f"mmsverify: configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = Path(cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        code, extra = COMMANDS[args.command](args, cfg, out_dir)
    except MmsError as err:
        print(f"mmsverify: {type(err).__name__}: {err}", file=sys.stderr)
        write_manifest(out_dir, cfg, args.command, argv, {"error": str(err)})
        return EXIT_SOLVER
    write_manifest(out_dir, cfg, args.command, argv, extra)
    return code


if __name__ == "__main__":
    sys.exit(main())
