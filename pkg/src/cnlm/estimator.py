"""scikit-learn style wrappers around the modulators.

``X`` is a reference waveform sampled once per control step, shape
``(n_steps,)`` or ``(n_steps, 1)``. ``transform`` returns the chosen switch
states, ``predict`` the commanded output voltage per step.

>>> mod = ConditionalNLMModulator(alpha=0.01, beta=0.3).fit(refs)   # doctest: +SKIP
>>> states = mod.transform(refs)                                    # doctest: +SKIP
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .converter import ConverterConfig, distinct_levels
from .deadtime import LoadModel
from .modulation import PenaltyConfig
from .simulate import SimulationTrace, simulate


def _as_reference(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single reference column, got shape {X.shape}")
        X = X[:, 0]
    return X


class NLMModulator(TransformerMixin, BaseEstimator):
    """Nearest-level modulation of a multilevel converter.

    Parameters
    ----------
    voltages : sequence of float
        Module voltages in volts.
    control_step, dead_time : float
        Control step and dead-time length in seconds.
    inductance, series_resistance, initial_current : float
        Load model driving the freewheeling polarity.
    samples_per_step : int
        Resolution of the synthesised waveform used by :meth:`score`.
    """

    def __init__(self, voltages=(37.0, 55.0, 83.0, 125.0), control_step=200e-9, dead_time=100e-9,
                 inductance=14e-6, series_resistance=0.0, initial_current=0.0, samples_per_step=10):
        self.voltages = voltages
        self.control_step = control_step
        self.dead_time = dead_time
        self.inductance = inductance
        self.series_resistance = series_resistance
        self.initial_current = initial_current
        self.samples_per_step = samples_per_step

    def _penalty(self) -> PenaltyConfig:
        return PenaltyConfig()

    def fit(self, X=None, y=None):
        """Validate parameters. The modulator has nothing to learn from `X`."""
        if X is not None:
            _as_reference(X)
        self.converter_ = ConverterConfig(tuple(self.voltages), self.dead_time, self.control_step)
        self.load_ = LoadModel(self.inductance, self.series_resistance, self.initial_current)
        self.penalty_ = self._penalty()
        self.penalty_.alpha_vector(self.converter_.n_modules)
        self.n_modules_ = self.converter_.n_modules
        self.levels_ = np.asarray(distinct_levels(self.converter_))
        return self

    def simulate(self, X) -> SimulationTrace:
        """Full closed-loop trace (decisions, fine waveform, load current)."""
        check_is_fitted(self, "converter_")
        refs = _as_reference(X)
        return simulate(self.converter_, self.penalty_, refs, self.load_, self.samples_per_step)

    def transform(self, X) -> np.ndarray:
        return self.simulate(X).states

    def predict(self, X) -> np.ndarray:
        states = self.transform(X)
        return states @ self.converter_.voltage_array

    def score(self, X, y=None) -> float:
        """Negative total distortion in percent (higher is better)."""
        return -self.simulate(X).distortion.total_distortion_pct


class ConditionalNLMModulator(NLMModulator):
    """Nearest-level modulation with over-switching and dead-time spike penalties.

    ``alpha`` may be a scalar or one weight per module. ``min_interval_steps``
    enables the hard switching-interval floor. See :class:`cnlm.PenaltyConfig`.
    """

    def __init__(self, voltages=(37.0, 55.0, 83.0, 125.0), alpha=0.0, beta=0.0, o_norm=1,
                 p_exponent=1.0, q_mode="simplified", min_interval_steps=None,
                 control_step=200e-9, dead_time=100e-9, inductance=14e-6, series_resistance=0.0,
                 initial_current=0.0, samples_per_step=10):
        super().__init__(voltages, control_step, dead_time, inductance, series_resistance,
                         initial_current, samples_per_step)
        self.alpha = alpha
        self.beta = beta
        self.o_norm = o_norm
        self.p_exponent = p_exponent
        self.q_mode = q_mode
        self.min_interval_steps = min_interval_steps

    def _penalty(self) -> PenaltyConfig:
        alpha = self.alpha if np.ndim(self.alpha) == 0 else tuple(self.alpha)
        return PenaltyConfig(alpha, self.beta, self.o_norm, self.p_exponent, self.q_mode,
                             self.min_interval_steps)
