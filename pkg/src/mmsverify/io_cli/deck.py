"""
Load decks for an external solver.

Concentrated loads are written as ``*CLOAD`` data lines, one per interior
node and nonzero dof. Distributed loads depend on position, so they are
exported as a table sampled at the element Gauss points, to be read back
by a user subroutine or compared with the built-in body-load assembly.
"""
import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..constitutive import REFERENCE_MATERIAL, CaseId, MaterialParams
from ..fem import build_mesh
from ..manufactured import REFERENCE_FIELD, MmsField, load_value

LOAD_KINDS = ("cload", "dload")
DLOAD_HEADER = ("X", "Y", "Z", "val_x", "val_y", "val_z")


@dataclass(frozen=True)
class DeckSpec:
    """What to export: mesh resolution, load kind and target case.

    ``nlgeom`` defaults to the finite-strain flag of the case; with it on,
    distributed loads are divided by J because the external solver
    integrates them over the deformed volume.
    """
    N: int
    load: str = "cload"
    case: CaseId = CaseId.I
    nlgeom: Optional[bool] = None
    precision: int = 16
    emit_zeros: bool = False
    params: MaterialParams = REFERENCE_MATERIAL
    field: MmsField = REFERENCE_FIELD

    def __post_init__(self):
        object.__setattr__(self, "case", CaseId.parse(self.case))
        if self.load not in LOAD_KINDS:
            raise ValueError(f"load must be one of {LOAD_KINDS}, got {self.load!r}")
        if not 1 <= int(self.precision) <= 17:
            raise ValueError(f"precision must be between 1 and 17 digits, got {self.precision}")
        if self.nlgeom is None:
            object.__setattr__(self, "nlgeom", self.case.finite_strain)

    def fmt(self, x):
        return format(float(x), f".{self.precision}g")


def export_cload(spec: DeckSpec, out):
    """Write ``*CLOAD`` lines ``node, dof, phi h^3``; returns the number of data lines.

    Node ids are 1-based and lexicographic (X fastest). Values that are
    exactly zero are left out unless ``spec.emit_zeros`` is set.
    """
    if spec.load != "cload":
        raise ValueError("export_cload needs a DeckSpec with load='cload'")
    mesh = build_mesh(spec.N)
    ids = mesh.interior_nodes
    values = load_value(spec.case, spec.params, spec.field, mesh.nodes[ids], "lumped", h=mesh.h)
    out.write("*CLOAD\n")
    count = 0
    for node, vals in zip(ids, values):
        for dof, v in enumerate(vals, start=1):
            if v == 0.0 and not spec.emit_zeros:
                continue
            out.write(f"{node + 1}, {dof}, {spec.fmt(v)}\n")
            count += 1
    return count


def export_dload_table(spec: DeckSpec, out):
    """Write ``X,Y,Z,val_x,val_y,val_z`` at every element Gauss point; returns the row count."""
    if spec.load != "dload":
        raise ValueError("export_dload_table needs a DeckSpec with load='dload'")
    mesh = build_mesh(spec.N)
    X = mesh.gauss_coordinates().reshape(-1, 3)
    values = load_value(spec.case, spec.params, spec.field, X, "body", nlgeom=spec.nlgeom)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(DLOAD_HEADER)
    for x, v in zip(X, values):
        w.writerow([spec.fmt(c) for c in (*x, *v)])
    return len(X)


def export_deck(spec: DeckSpec, out):
    """Dispatch on ``spec.load``."""
    if spec.load == "cload":
        return export_cload(spec, out)
    return export_dload_table(spec, out)


def read_dload_table(lines):
    """Parse a table written by :func:`export_dload_table` into (X, values) arrays."""
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0]) != DLOAD_HEADER:
        raise ValueError("not a distributed-load table")
    data = np.array(rows[1:], dtype=float).reshape(-1, 6)
    return data[:, :3], data[:, 3:]
