"""Nearest-level (NLM) and conditional nearest-level modulation (cNLM) for
asymmetric multilevel converters, with dead-time spike synthesis and
switching-dynamics metrics."""

from .converter import (
    MAX_ENUM_MODULES,
    CapacityError,
    ConverterConfig,
    check_switch_vector,
    distinct_levels,
    enumerate_states,
    geometric_profile,
    output_voltage,
)
from .deadtime import (
    FineWaveform,
    LoadModel,
    deadtime_voltage,
    deviation_vd,
    integrate_current,
    synthesize_waveform,
)
from .metrics import (
    DistortionReport,
    SwitchingStats,
    metrics_summary,
    spectrum,
    switching_stats,
    total_distortion,
)
from .modulation import (
    ModulatorState,
    PenaltyConfig,
    StepDecision,
    cnlm_step,
    nlm_step,
    switching_interval,
    term_O,
    term_P,
    term_Q,
)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .signals import ReferenceSpec, sample_reference
from .simulate import SimulationTrace, simulate
from .sweep import SweepSpec, run_sweep

__version__ = "0.1.0"
