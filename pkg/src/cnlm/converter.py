"""Static converter description and switch-state algebra.

A converter is a series stack of bridge modules. Module ``n`` contributes
``V[n] * S[n]`` to the output, with ``S[n]`` in ``{-1, 0, +1}``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Largest module count accepted by :func:`enumerate_states`. 3**12 = 531441.
MAX_ENUM_MODULES = 12

_STATE_CACHE: dict[int, np.ndarray] = {}


class CapacityError(ValueError):
    """Raised when a state enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class ConverterConfig:
    """Module voltages and timing of a cascaded bridge converter.

    Parameters
    ----------
    voltages : sequence of float
        Module voltages in volts, one per module.
    dead_time : float
        Dead-time length in seconds.
    control_step : float
        Duration of one discrete control step in seconds.
    """

    voltages: tuple[float, ...]
    dead_time: float = 100e-9
    control_step: float = 200e-9

    def __post_init__(self):
        volts = tuple(float(v) for v in self.voltages)
        object.__setattr__(self, "voltages", volts)
        if len(volts) < 1:
            raise ValueError("at least one module voltage is required")
        if not all(v > 0 and math.isfinite(v) for v in volts):
            raise ValueError(f"module voltages must be finite and positive, got {volts}")
        if not self.control_step > 0:
            raise ValueError("control_step must be positive")
        if not 0 <= self.dead_time < self.control_step:
            raise ValueError(
                f"dead_time ({self.dead_time:g} s) must be non-negative and shorter "
                f"than control_step ({self.control_step:g} s)"
            )

    @property
    def n_modules(self) -> int:
        return len(self.voltages)

    @property
    def voltage_array(self) -> np.ndarray:
        return np.asarray(self.voltages, dtype=float)

    @property
    def max_output(self) -> float:
        return sum(self.voltages)

    @property
    def is_asymmetric(self) -> bool:
        return len(set(self.voltages)) > 1

    def with_voltages(self, voltages: Sequence[float]) -> "ConverterConfig":
        return ConverterConfig(tuple(voltages), self.dead_time, self.control_step)


def check_switch_vector(s, n_modules: int | None = None) -> tuple[int, ...]:
    """Validate a switch vector and return it as a tuple of ints."""
    states = tuple(int(x) for x in np.asarray(s).ravel())
    if any(x not in (-1, 0, 1) for x in states):
        raise ValueError(f"switch states must be in {{-1, 0, +1}}, got {states}")
    if n_modules is not None and len(states) != n_modules:
        raise ValueError(
            f"switch vector has {len(states)} entries, converter has {n_modules} modules"
        )
    return states


def output_voltage(s, cfg: ConverterConfig) -> float:
    """Series output voltage ``V . S`` of switch vector `s`."""
    states = check_switch_vector(s, cfg.n_modules)
    total = 0.0
    for v, x in zip(cfg.voltages, states):
        total += v * x
    return total


def enumerate_states(n: int, cap: int = MAX_ENUM_MODULES) -> np.ndarray:
    """All ``3**n`` switch vectors as an ``(3**n, n)`` int8 array.

    Rows follow a ternary counter over the digits ``(-1, 0, +1)`` with module 0
    as the least significant (fastest varying) digit. Downstream tie-breaking
    relies on this order.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n > cap:
        raise CapacityError(f"cannot enumerate 3**{n} states: module count exceeds cap of {cap}")
    cached = _STATE_CACHE.get(n)
    if cached is None:
        # itertools.product varies the last position fastest; reverse columns
        rows = np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=np.int8)
        cached = np.ascontiguousarray(rows[:, ::-1])
        cached.setflags(write=False)
        _STATE_CACHE[n] = cached
    return cached


def distinct_levels(cfg: ConverterConfig, rtol: float = 1e-9) -> list[float]:
    """Sorted distinct output voltages reachable by `cfg`.

    Sums closer than `rtol` relative to the converter range are merged.
    """
    states = enumerate_states(cfg.n_modules)
    sums = np.sort(states @ cfg.voltage_array)
    tol = rtol * cfg.max_output
    levels = [float(sums[0])]
    for x in sums[1:]:
        if x - levels[-1] > tol:
            levels.append(float(x))
    # snap exact-symmetric rounding noise to clean values
    return [0.0 if abs(x) <= tol else x for x in levels]


def geometric_profile(base: float, ratio: float, n: int, round_to_volt: bool = False) -> list[float]:
    """Module voltages ``[base, base*ratio, ..., base*ratio**(n-1)]``."""
    if base <= 0:
        raise ValueError("base voltage must be positive")
    if n < 1:
        raise ValueError("n must be a positive integer")
    values = [base * ratio**i for i in range(n)]
    if round_to_volt:
        # half-up rounding; Python's round() would send 55.5 to 56 anyway but 54.5 to 54
        values = [float(math.floor(v + 0.5)) for v in values]
    return values
