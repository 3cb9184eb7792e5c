"""Dead-time freewheeling and the fine-grained output waveform.

While a module's half bridges change state both transistors are off and the
module output is set by the load current through the freewheeling diodes:
``-V_n * sign(i)``. Non-switching modules keep their commanded level.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .converter import ConverterConfig, check_switch_vector


@dataclass(frozen=True)
class LoadModel:
    """Series R-L load. Defaults to the bare 14 uH inductor."""

    inductance: float = 14e-6
    series_resistance: float = 0.0
    initial_current: float = 0.0

    def __post_init__(self):
        if not self.inductance > 0:
            raise ValueError("inductance must be positive")
        if self.series_resistance < 0:
            raise ValueError("series_resistance must be non-negative")


@dataclass(frozen=True)
class FineWaveform:
    """Uniformly sampled output, reference and load current."""

    sample_period: float
    t: np.ndarray
    v_out: np.ndarray
    v_ref: np.ndarray
    i: np.ndarray

    def __len__(self):
        return len(self.t)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_s", "v_out_V", "v_ref_V", "i_A"])
            for row in zip(self.t, self.v_out, self.v_ref, self.i):
                writer.writerow([repr(float(x)) for x in row])


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def deadtime_voltage(prev, chosen, cfg: ConverterConfig, current_sign: int) -> float:
    """Converter output during the dead-time window of a transition."""
    prev = check_switch_vector(prev, cfg.n_modules)
    chosen = check_switch_vector(chosen, cfg.n_modules)
    sgn = _sign(current_sign)
    total = 0.0
    for v, p, c in zip(cfg.voltages, prev, chosen):
        total += -v * sgn if p != c else v * c
    return total


def deviation_vd(prev, chosen, cfg: ConverterConfig, current_sign: int) -> float:
    """Commanded minus dead-time output, ``sum V_n (S_n + sign(i)) D_n``.

    Only switching modules deviate, so non-switching terms vanish.
    """
    prev = check_switch_vector(prev, cfg.n_modules)
    chosen = check_switch_vector(chosen, cfg.n_modules)
    sgn = _sign(current_sign)
    total = 0.0
    for v, p, c in zip(cfg.voltages, prev, chosen):
        if p != c:
            total += v * (c + sgn)
    return total


def integrate_current(load: LoadModel, v_applied: float, dt: float, i: float) -> float:
    """One explicit-Euler step of ``L di/dt = v - R i``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return i + dt * (v_applied - load.series_resistance * i) / load.inductance


def fine_grid(cfg: ConverterConfig, samples_per_step: int) -> tuple[float, int]:
    """Fine sample period and the dead time expressed in whole fine samples."""
    if samples_per_step < 1 or int(samples_per_step) != samples_per_step:
        raise ValueError("samples_per_step must be a positive integer")
    period = cfg.control_step / samples_per_step
    n_dead = int(math.floor(cfg.dead_time / period + 0.5))
    if cfg.dead_time > 0 and n_dead >= samples_per_step:
        raise ValueError("dead time must span fewer fine samples than one control step")
    return period, n_dead


class WaveformBuilder:
    """Incremental fine-waveform synthesis, one control step at a time.

    The load-current sign is frozen at each step boundary for the whole
    dead-time window; the current is integrated from the applied voltage.
    """

    def __init__(self, cfg: ConverterConfig, load: LoadModel, samples_per_step: int = 10):
        self.cfg = cfg
        self.load = load
        self.samples_per_step = int(samples_per_step)
        self.sample_period, self.n_dead = fine_grid(cfg, samples_per_step)
        self.current = float(load.initial_current)
        self._v: list[float] = []
        self._i: list[float] = []

    @property
    def current_sign(self) -> int:
        return _sign(self.current)

    def add_step(self, chosen: Sequence[int], switched: Sequence[bool]) -> None:
        volts = self.cfg.voltages
        sgn = self.current_sign
        commanded = 0.0
        for v, c in zip(volts, chosen):
            commanded += v * c
        dead = commanded
        if any(switched):
            dead = 0.0
            for v, c, d in zip(volts, chosen, switched):
                dead += -v * sgn if d else v * c
        i = self.current
        ts = self.sample_period
        ind = self.load.inductance
        r = self.load.series_resistance
        for j in range(self.samples_per_step):
            v_out = dead if j < self.n_dead else commanded
            self._v.append(v_out)
            self._i.append(i)
            i = i + ts * (v_out - r * i) / ind
        self.current = i

    def build(self, fine_refs: np.ndarray) -> FineWaveform:
        n = len(self._v)
        if len(fine_refs) != n:
            raise ValueError(f"expected {n} fine reference samples, got {len(fine_refs)}")
        return FineWaveform(
            sample_period=self.sample_period,
            t=np.arange(n) * self.sample_period,
            v_out=np.asarray(self._v),
            v_ref=np.asarray(fine_refs, dtype=float),
            i=np.asarray(self._i),
        )


def synthesize_waveform(decisions, cfg: ConverterConfig, load: LoadModel, refs,
                        samples_per_step: int = 10) -> FineWaveform:
    """Fine output waveform of a decision sequence.

    `refs` is either one reference value per control step (held over the step)
    or one value per fine sample.
    """
    builder = WaveformBuilder(cfg, load, samples_per_step)
    for dec in decisions:
        builder.add_step(dec.chosen, dec.switched_mask)
    refs = np.asarray(refs, dtype=float)
    if len(refs) == len(decisions) and samples_per_step > 1:
        refs = np.repeat(refs, samples_per_step)
    return builder.build(refs)
