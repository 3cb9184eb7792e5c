"""Closed-loop simulation: modulator, dead-time waveform and load current."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .converter import ConverterConfig
from .deadtime import FineWaveform, LoadModel, WaveformBuilder
from .metrics import DistortionReport, SwitchingStats, switching_stats, total_distortion
from .modulation import ModulatorState, PenaltyConfig, StepDecision, cnlm_step
from .signals import ReferenceSpec, reference_values, step_references


@dataclass(frozen=True)
class SimulationTrace:
    decisions: tuple[StepDecision, ...]
    waveform: FineWaveform
    step_refs: np.ndarray
    cfg: ConverterConfig

    @property
    def states(self) -> np.ndarray:
        return np.array([d.chosen for d in self.decisions], dtype=np.int8)

    @property
    def load_current(self) -> np.ndarray:
        return self.waveform.i

    @cached_property
    def stats(self) -> SwitchingStats:
        return switching_stats(self.decisions, self.cfg)

    @cached_property
    def distortion(self) -> DistortionReport:
        return total_distortion(self.waveform)


def simulate(cfg: ConverterConfig, pcfg: PenaltyConfig, reference: ReferenceSpec | np.ndarray,
             load: LoadModel | None = None, samples_per_step: int = 10) -> SimulationTrace:
    """Run the modulator over a reference and synthesise the output waveform.

    `reference` is a :class:`ReferenceSpec` (sampled at each step start and at
    every fine sample) or a plain array of per-step reference values.
    """
    load = LoadModel() if load is None else load
    builder = WaveformBuilder(cfg, load, samples_per_step)
    if isinstance(reference, ReferenceSpec):
        refs = step_references(reference, cfg.control_step)
        fine_refs = reference_values(
            reference, np.arange(len(refs) * samples_per_step) * builder.sample_period
        )
    else:
        refs = np.asarray(reference, dtype=float)
        fine_refs = np.repeat(refs, samples_per_step)

    state = ModulatorState.initial(cfg.n_modules)
    decisions = []
    for v_ref in refs:
        dec = cnlm_step(state, v_ref, cfg, pcfg, builder.current_sign)
        builder.add_step(dec.chosen, dec.switched_mask)
        decisions.append(dec)
        state = dec.state
    return SimulationTrace(tuple(decisions), builder.build(fine_refs), refs, cfg)
