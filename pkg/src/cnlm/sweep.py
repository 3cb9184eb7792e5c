"""Grid exploration of the penalty weights alpha and beta."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .metrics import DistortionReport, SwitchingStats
from .scenario import Scenario
from .simulate import simulate

DEFAULT_ALPHAS = (0.0, 0.01, 0.03, 0.1, 0.3, 1.0)
DEFAULT_BETAS = (0.0, 0.01, 0.02, 0.1, 0.3, 1.0)

CSV_HEADER = ["alpha", "beta", "total_distortion_pct", "avg_rate_hz", "min_interval_ns", "mean_interval_ns"]


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    alpha_values: Sequence[float] = DEFAULT_ALPHAS
    beta_values: Sequence[float] = DEFAULT_BETAS
    samples_per_step: int = 10

    def __post_init__(self):
        if not len(self.alpha_values) or not len(self.beta_values):
            raise ValueError("alpha and beta grids must be non-empty")


@dataclass(frozen=True)
class SweepCell:
    alpha_index: int
    beta_index: int
    alpha: float
    beta: float
    stats: SwitchingStats
    distortion: DistortionReport

    def csv_row(self) -> list:
        min_iv = self.stats.min_interval_s
        mean_iv = self.stats.mean_interval_s
        return [
            self.alpha,
            self.beta,
            self.distortion.total_distortion_pct,
            self.stats.avg_rate_hz,
            math.nan if min_iv is None else min_iv * 1e9,
            math.nan if mean_iv is None else mean_iv * 1e9,
        ]


def _run_cell(args) -> SweepCell:
    i, j, alpha, beta, scenario, samples_per_step = args
    try:
        penalty = replace(scenario.penalty, alpha=alpha, beta=beta)
        trace = simulate(scenario.converter, penalty, scenario.reference, scenario.load, samples_per_step)
        return SweepCell(i, j, alpha, beta, trace.stats, trace.distortion)
    except Exception as exc:
        raise SweepError(f"sweep cell ({i}, {j}) alpha={alpha} beta={beta} failed: {exc}") from exc


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepCell]:
    """Simulate every (alpha, beta) pair; results ordered by (alpha index, beta index).

    Cells are independent, so any `workers` count gives identical results.
    """
    jobs = [
        (i, j, float(a), float(b), spec.scenario, spec.samples_per_step)
        for i, a in enumerate(spec.alpha_values)
        for j, b in enumerate(spec.beta_values)
    ]
    if workers <= 1:
        cells = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs))
    return sorted(cells, key=lambda c: (c.alpha_index, c.beta_index))


def write_sweep_csv(cells: Sequence[SweepCell], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for cell in cells:
            writer.writerow([repr(float(x)) for x in cell.csv_row()])
