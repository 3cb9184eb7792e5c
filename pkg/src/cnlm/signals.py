"""Reference waveforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("gaussian_polyphasic", "sine", "constant", "file")


@dataclass(frozen=True)
class ReferenceSpec:
    """Reference signal description.

    The default is a Gaussian-enveloped 10 kHz sinusoid (Gabor pulse) with
    ``sigma = 80 us`` centred in a 600 us window, spanning the full +-300 V
    range of the default converter.
    """

    kind: str = "gaussian_polyphasic"
    amplitude: float = 300.0
    fundamental_hz: float = 10e3
    sigma_s: float = 80e-6
    center_s: float | None = None
    duration_s: float = 600e-6
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"reference kind must be one of {KINDS}, got {self.kind!r}")
        if not self.duration_s > 0:
            raise ValueError("duration_s must be positive")
        if self.kind in ("gaussian_polyphasic", "sine") and not self.fundamental_hz > 0:
            raise ValueError("fundamental_hz must be positive")
        if self.kind == "gaussian_polyphasic":
            if not self.sigma_s > 0:
                raise ValueError("sigma_s must be positive")
            if self.duration_s < 6 * self.sigma_s * (1 - 1e-12):
                raise ValueError(
                    f"duration_s ({self.duration_s:g}) must be at least 6 * sigma_s ({6 * self.sigma_s:g})"
                )
        if self.kind == "file" and not self.path:
            raise ValueError("file reference needs a path")
        if self.center_s is None:
            object.__setattr__(self, "center_s", self.duration_s / 2)

    def with_amplitude(self, amplitude: float) -> "ReferenceSpec":
        return ReferenceSpec(self.kind, amplitude, self.fundamental_hz, self.sigma_s,
                             self.center_s, self.duration_s, self.path)


_FILE_CACHE: dict[str, tuple[np.ndarray, np.ndarray]] = {}


def load_reference_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``t_s, v_V`` CSV; a non-numeric header row is skipped."""
    key = str(path)
    if key not in _FILE_CACHE:
        times, values = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    t, v = float(row[0]), float(row[1])
                except ValueError:
                    if not times:
                        continue  # header
                    raise
                times.append(t)
                values.append(v)
        if not times:
            raise ValueError(f"reference file {path} holds no samples")
        t_arr = np.asarray(times)
        if np.any(np.diff(t_arr) < 0):
            raise ValueError(f"reference file {path} must be sorted by time")
        _FILE_CACHE[key] = (t_arr, np.asarray(values))
    return _FILE_CACHE[key]


def reference_values(spec: ReferenceSpec, t) -> np.ndarray:
    """Vectorised :func:`sample_reference` over an array of times."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > spec.duration_s * (1 + 1e-12)):
        raise ValueError(f"sample time outside [0, {spec.duration_s:g}] s")
    if spec.kind == "gaussian_polyphasic":
        tau = t - spec.center_s
        return (spec.amplitude * np.sin(2 * np.pi * spec.fundamental_hz * tau)
                * np.exp(-tau**2 / (2 * spec.sigma_s**2)))
    if spec.kind == "sine":
        return spec.amplitude * np.sin(2 * np.pi * spec.fundamental_hz * t)
    if spec.kind == "constant":
        return np.full_like(t, spec.amplitude)
    times, values = load_reference_csv(spec.path)
    if len(times) == 1:
        return np.full_like(t, values[0])
    right = np.clip(np.searchsorted(times, t), 1, len(times) - 1)
    left = right - 1
    nearest = np.where(t - times[left] <= times[right] - t, left, right)
    return values[nearest]


def sample_reference(spec: ReferenceSpec, t: float) -> float:
    """Reference voltage at time `t` (seconds)."""
    return float(reference_values(spec, np.array([t]))[0])


def step_references(spec: ReferenceSpec, control_step: float) -> np.ndarray:
    """Reference sampled at the start of each control step in the window."""
    n_steps = int(math.floor(spec.duration_s / control_step + 1e-9))
    return reference_values(spec, np.arange(n_steps) * control_step)
