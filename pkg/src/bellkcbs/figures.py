"""CSV data behind the alpha-beta plane figure (no plotting)."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .dataset import ExperimentRecord
from .inequalities import ALPHA_BOUND, BETA_BOUND, region_of
from .search import ScanPoint
from .verify import verify_record

CURVE_HEADER = ("phi", "alpha", "beta")
POINTS_HEADER = ("state_id", "alpha", "alpha_sigma", "beta", "beta_sigma", "region")
BOUNDS_HEADER = ("bound", "alpha0", "beta0", "alpha1", "beta1")


def write_csv(fh: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])


def curve_rows(scan: Sequence[ScanPoint]):
    return [(p.phi, p.alpha, p.beta) for p in scan]


def point_rows(records: Sequence[ExperimentRecord]):
    rows = []
    for r in records:
        v = verify_record(r)
        rows.append((r.state_id, v.alpha_exp, v.sigma_alpha, v.beta_exp, v.sigma_beta,
                     region_of(v.alpha_exp, v.beta_exp)))
    return rows


def bound_rows(alpha_range=(-4.0, 4.0), beta_range=(-5.0, 5.0)):
    """Each bound as a segment spanning the plot range."""
    return [
        ("alpha", ALPHA_BOUND, beta_range[0], ALPHA_BOUND, beta_range[1]),
        ("beta", alpha_range[0], BETA_BOUND, alpha_range[1], BETA_BOUND),
    ]


def emit_figure_data(scan: Sequence[ScanPoint], records: Sequence[ExperimentRecord], out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "curve": (out / "curve.csv", CURVE_HEADER, curve_rows(scan)),
        "points": (out / "points.csv", POINTS_HEADER, point_rows(records)),
        "bounds": (out / "bounds.csv", BOUNDS_HEADER, bound_rows()),
    }
    for path, header, rows in files.values():
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, header, rows)
    return {k: v[0] for k, v in files.items()}
