"""Figures of merit: total distortion, switching statistics and spectra."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .converter import ConverterConfig
from .deadtime import FineWaveform


@dataclass(frozen=True)
class DistortionReport:
    total_distortion_pct: float
    rms_error_V: float
    rms_ref_V: float


@dataclass(frozen=True)
class SwitchingStats:
    """Switching events extracted from a decision sequence.

    ``events[n]`` lists ``(step, interval_steps)`` for module ``n``; the first
    switch of a module has no predecessor and carries ``interval_steps=None``.
    Rates are aggregated over all modules.
    """

    events: tuple[tuple[tuple[int, int | None], ...], ...]
    control_step: float
    duration_s: float

    @property
    def event_counts(self) -> list[int]:
        return [len(ev) for ev in self.events]

    @property
    def total_events(self) -> int:
        return sum(self.event_counts)

    @property
    def intervals_steps(self) -> np.ndarray:
        return np.array([dt for ev in self.events for _, dt in ev if dt is not None], dtype=float)

    @property
    def min_interval_s(self) -> float | None:
        iv = self.intervals_steps
        return None if iv.size == 0 else float(iv.min()) * self.control_step

    @property
    def mean_interval_s(self) -> float | None:
        iv = self.intervals_steps
        return None if iv.size == 0 else float(iv.mean()) * self.control_step

    @property
    def avg_rate_hz(self) -> float:
        return self.total_events / self.duration_s

    @property
    def per_module_rate_hz(self) -> list[float]:
        return [c / self.duration_s for c in self.event_counts]

    def scatter_rows(self):
        """``(t_s, interval_s, module)`` for every event with a predecessor, in time order."""
        rows = [
            (k * self.control_step, dt * self.control_step, n)
            for n, ev in enumerate(self.events)
            for k, dt in ev
            if dt is not None
        ]
        rows.sort(key=lambda r: (r[0], r[2]))
        return rows

    def to_scatter_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_s", "interval_s", "module"])
            for t, iv, n in self.scatter_rows():
                writer.writerow([repr(t), repr(iv), n])


def total_distortion(w: FineWaveform) -> DistortionReport:
    """Relative RMS deviation of the output from the reference, in percent."""
    if len(w) == 0:
        raise ValueError("waveform is empty")
    rms_ref = float(np.sqrt(np.mean(np.square(w.v_ref))))
    if rms_ref == 0:
        raise ZeroDivisionError("reference RMS is zero; total distortion undefined")
    rms_err = float(np.sqrt(np.mean(np.square(w.v_out - w.v_ref))))
    return DistortionReport(100.0 * rms_err / rms_ref, rms_err, rms_ref)


def switching_stats(decisions, cfg: ConverterConfig) -> SwitchingStats:
    n = cfg.n_modules
    events: list[list[tuple[int, int | None]]] = [[] for _ in range(n)]
    last: list[int | None] = [None] * n
    for k, dec in enumerate(decisions):
        for m, d in enumerate(dec.switched_mask):
            if d:
                events[m].append((k, None if last[m] is None else k - last[m]))
                last[m] = k
    return SwitchingStats(
        events=tuple(tuple(ev) for ev in events),
        control_step=cfg.control_step,
        duration_s=len(decisions) * cfg.control_step,
    )


def spectrum(w: FineWaveform) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hann-windowed one-sided magnitude spectra of output and reference.

    Returns ``(freq_hz, mag_out, mag_ref)``; magnitudes are amplitude-scaled by
    the window sum so a bin-aligned sinusoid of amplitude A reads about A/2.
    """
    n = len(w)
    # periodic Hann: a constant leaks only into the first bin
    win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n) if n > 1 else np.ones(1)
    scale = win.sum()
    freq = np.fft.rfftfreq(n, d=w.sample_period)
    mag_out = np.abs(np.fft.rfft(w.v_out * win)) / scale
    mag_ref = np.abs(np.fft.rfft(w.v_ref * win)) / scale
    return freq, mag_out, mag_ref


def spectral_error(w: FineWaveform) -> float:
    """L2 distance between output and reference magnitude spectra."""
    _, mo, mr = spectrum(w)
    return float(np.sqrt(np.sum((mo - mr) ** 2)))


def metrics_summary(stats: SwitchingStats, report: DistortionReport) -> dict:
    min_iv = stats.min_interval_s
    mean_iv = stats.mean_interval_s
    return {
        "total_distortion_pct": report.total_distortion_pct,
        "rms_error_V": report.rms_error_V,
        "rms_ref_V": report.rms_ref_V,
        "avg_switching_rate_hz": stats.avg_rate_hz,
        "min_switching_interval_ns": None if min_iv is None else min_iv * 1e9,
        "mean_switching_interval_ns": None if mean_iv is None else mean_iv * 1e9,
        "per_module_events": stats.event_counts,
        "per_module_rate_hz": stats.per_module_rate_hz,
    }


def write_metrics_json(summary: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
