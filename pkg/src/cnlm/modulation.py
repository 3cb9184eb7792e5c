"""Nearest-level and conditional nearest-level modulation.

Every control step picks the switch vector minimising

    objective = O + alpha * P + beta * Q

over all ``3**N`` candidates, where ``O`` is the tracking error, ``P`` the
over-switching penalty built from per-module switching intervals and ``Q`` the
dead-time spike penalty. Plain NLM is the ``alpha = beta = 0`` case.

Switching intervals are counted in control steps, not seconds, so ``1/dt`` is
at most 1 and ``alpha`` is in volts * steps. ``beta`` is dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .converter import ConverterConfig, check_switch_vector, enumerate_states

NEVER = None
Q_MODES = ("simplified", "precise")


@dataclass(frozen=True)
class PenaltyConfig:
    """Weights and variants of the cNLM objective.

    Parameters
    ----------
    alpha : float or sequence of float
        Over-switching weight, either shared or one per module.
    beta : float
        Dead-time spike weight.
    o_norm : int
        Exponent of the tracking error ``|v_ref - V.S|``.
    p_exponent : float
        Exponent applied to each module's ``D_n / dt_n`` term.
    q_mode : {"simplified", "precise"}
        ``simplified`` penalises the summed voltage of switching modules;
        ``precise`` penalises the predicted dead-time deviation using the
        load-current sign.
    min_interval_steps : int, optional
        Hard switching-interval floor. When set, a module may only switch if
        more than this many steps passed since its last switch, and the
        interval penalty becomes ``sum 1 / (dt_n - floor)``.
    """

    alpha: float | tuple[float, ...] = 0.0
    beta: float = 0.0
    o_norm: int = 1
    p_exponent: float = 1.0
    q_mode: str = "simplified"
    min_interval_steps: int | None = None

    def __post_init__(self):
        if np.ndim(self.alpha) == 0:
            alpha = float(self.alpha)
            if not alpha >= 0:
                raise ValueError(f"alpha must be non-negative, got {alpha}")
        else:
            alpha = tuple(float(a) for a in self.alpha)
            if not all(a >= 0 for a in alpha):
                raise ValueError(f"per-module alpha must be non-negative, got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        if not float(self.beta) >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))
        if int(self.o_norm) != self.o_norm or self.o_norm < 1:
            raise ValueError(f"o_norm must be an integer >= 1, got {self.o_norm}")
        object.__setattr__(self, "o_norm", int(self.o_norm))
        if not self.p_exponent > 0:
            raise ValueError(f"p_exponent must be positive, got {self.p_exponent}")
        if self.q_mode not in Q_MODES:
            raise ValueError(f"q_mode must be one of {Q_MODES}, got {self.q_mode!r}")
        if self.min_interval_steps is not None:
            if int(self.min_interval_steps) != self.min_interval_steps or self.min_interval_steps < 0:
                raise ValueError("min_interval_steps must be a non-negative integer")
            object.__setattr__(self, "min_interval_steps", int(self.min_interval_steps))

    def alpha_vector(self, n_modules: int) -> np.ndarray:
        if isinstance(self.alpha, tuple):
            if len(self.alpha) != n_modules:
                raise ValueError(
                    f"per-module alpha has {len(self.alpha)} entries, converter has {n_modules} modules"
                )
            return np.asarray(self.alpha)
        return np.full(n_modules, self.alpha)

    @property
    def is_plain_nlm(self) -> bool:
        return (
            self.beta == 0
            and not np.any(self.alpha)
            and self.min_interval_steps is None
            and self.o_norm == 1
        )


NLM_PENALTY = PenaltyConfig()


@dataclass(frozen=True)
class ModulatorState:
    """Modulator memory between control steps.

    ``last_switch[n]`` is the step at which module ``n`` last switched, or
    ``None`` if it never has.
    """

    step: int
    prev: tuple[int, ...]
    last_switch: tuple[int | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "prev", check_switch_vector(self.prev))
        object.__setattr__(self, "last_switch", tuple(self.last_switch))
        if self.step < 0:
            raise ValueError("step must be non-negative")
        if len(self.last_switch) != len(self.prev):
            raise ValueError("last_switch and prev must have one entry per module")
        for ls in self.last_switch:
            if ls is not None and not 0 <= ls < self.step:
                raise ValueError(f"last switch step {ls} must lie in [0, step={self.step})")

    @classmethod
    def initial(cls, n_modules: int, prev=None) -> "ModulatorState":
        prev = (0,) * n_modules if prev is None else prev
        return cls(0, prev, (NEVER,) * n_modules)

    @property
    def n_modules(self) -> int:
        return len(self.prev)

    def advance(self, chosen: Sequence[int]) -> "ModulatorState":
        """State after applying `chosen` at the current step."""
        last = tuple(
            self.step if c != p else ls
            for c, p, ls in zip(chosen, self.prev, self.last_switch)
        )
        return ModulatorState(self.step + 1, tuple(chosen), last)


@dataclass(frozen=True)
class StepDecision:
    """Outcome of one modulation step.

    ``p_term`` is the unweighted interval penalty ``P``; ``alpha_p`` is the
    weighted contribution that entered ``objective`` (they differ only by the
    per-module weights).
    """

    chosen: tuple[int, ...]
    o_term: float
    p_term: float
    alpha_p: float
    q_term: float
    objective: float
    switched_mask: tuple[bool, ...]
    v_ref: float
    current_sign: int
    state: ModulatorState = field(repr=False)

    @property
    def n_switched(self) -> int:
        return sum(self.switched_mask)


def switching_interval(state: ModulatorState, n: int) -> float:
    """Steps since module `n` last switched, ``inf`` if it never switched."""
    if not 0 <= n < state.n_modules:
        raise IndexError(f"module index {n} out of range for {state.n_modules} modules")
    ls = state.last_switch[n]
    if ls is None:
        return math.inf
    return state.step - ls


def term_O(candidate, v_ref_k: float, cfg: ConverterConfig, pcfg: PenaltyConfig = NLM_PENALTY) -> float:
    s = check_switch_vector(candidate, cfg.n_modules)
    out = 0.0
    for v, x in zip(cfg.voltages, s):
        out += v * x
    return abs(v_ref_k - out) ** pcfg.o_norm


def term_P(candidate, state: ModulatorState, pcfg: PenaltyConfig) -> float:
    """Unweighted interval penalty of switching from ``state.prev`` to `candidate`."""
    s = check_switch_vector(candidate, state.n_modules)
    total = 0.0
    for n, (c, p) in enumerate(zip(s, state.prev)):
        if c == p:
            continue
        dt = switching_interval(state, n)
        if pcfg.min_interval_steps is not None:
            slack = max(0.0, dt - pcfg.min_interval_steps)
            total += math.inf if slack == 0 else 1.0 / slack
        else:
            total += (1.0 / dt) ** pcfg.p_exponent
    return total


def term_Q(candidate, state: ModulatorState, cfg: ConverterConfig, pcfg: PenaltyConfig,
           current_sign: int = 0) -> float:
    """Dead-time spike penalty of switching from ``state.prev`` to `candidate`."""
    s = check_switch_vector(candidate, cfg.n_modules)
    total = 0.0
    for v, c, p in zip(cfg.voltages, s, state.prev):
        if c == p:
            continue
        if pcfg.q_mode == "precise":
            total += v * (c + current_sign)
        else:
            total += v
    return abs(total)


@dataclass
class _Evaluation:
    objective: np.ndarray
    o_term: np.ndarray
    p_term: np.ndarray
    alpha_p: np.ndarray
    q_term: np.ndarray
    q_simple: np.ndarray
    n_switch: np.ndarray
    switched: np.ndarray


def _evaluate(candidates: np.ndarray, state: ModulatorState, v_ref_k: float,
              cfg: ConverterConfig, pcfg: PenaltyConfig, current_sign: int) -> _Evaluation:
    volts = cfg.voltage_array
    n = cfg.n_modules
    prev = np.asarray(state.prev, dtype=np.int8)
    switched = candidates != prev

    contrib = candidates * volts
    out = contrib[:, 0].copy()
    for j in range(1, n):
        out += contrib[:, j]
    o_term = np.abs(v_ref_k - out) ** pcfg.o_norm

    dt = np.array([switching_interval(state, j) for j in range(n)])
    alpha = pcfg.alpha_vector(n)
    blocked = np.zeros(len(candidates), dtype=bool)
    if pcfg.min_interval_steps is not None:
        slack = np.maximum(0.0, dt - pcfg.min_interval_steps)
        with np.errstate(divide="ignore"):
            kernel = np.where(slack == 0, np.inf, 1.0 / slack)
        blocked = (switched & (slack == 0)).any(axis=1)
    else:
        kernel = (1.0 / dt) ** pcfg.p_exponent
    # per-module penalty terms, infinite ones zeroed and handled via `blocked`
    finite_kernel = np.where(np.isinf(kernel), 0.0, kernel)
    terms = np.where(switched, finite_kernel, 0.0)
    p_term = terms[:, 0].copy()
    alpha_p = alpha[0] * terms[:, 0]
    for j in range(1, n):
        p_term += terms[:, j]
        alpha_p += alpha[j] * terms[:, j]
    if not isinstance(pcfg.alpha, tuple):
        alpha_p = pcfg.alpha * p_term
    p_term[blocked] = np.inf
    alpha_p[blocked] = np.inf

    qv = np.where(switched, volts, 0.0)
    q_simple = qv[:, 0].copy()
    for j in range(1, n):
        q_simple += qv[:, j]
    if pcfg.q_mode == "precise":
        dev = np.where(switched, volts * (candidates + current_sign), 0.0)
        q_signed = dev[:, 0].copy()
        for j in range(1, n):
            q_signed += dev[:, j]
        q_term = np.abs(q_signed)
    else:
        q_term = q_simple

    objective = o_term + alpha_p + pcfg.beta * q_term
    return _Evaluation(objective, o_term, p_term, alpha_p, q_term, q_simple,
                       switched.sum(axis=1), switched)


def cnlm_step(state: ModulatorState, v_ref_k: float, cfg: ConverterConfig,
              pcfg: PenaltyConfig, current_sign: int = 0) -> StepDecision:
    """One conditional nearest-level modulation step.

    Scans all ``3**N`` candidates and returns the minimiser of the objective.
    Ties go to the candidate with fewer switching modules, then smaller summed
    switching voltage, then earlier canonical order. ``decision.state`` is the
    advanced modulator state.
    """
    if state.n_modules != cfg.n_modules:
        raise ValueError(
            f"modulator state has {state.n_modules} modules, converter has {cfg.n_modules}"
        )
    current_sign = int(np.sign(current_sign))
    candidates = enumerate_states(cfg.n_modules)
    ev = _evaluate(candidates, state, float(v_ref_k), cfg, pcfg, current_sign)

    best = ev.objective.min()
    tied = np.flatnonzero(ev.objective == best)
    if len(tied) > 1:
        order = np.lexsort((tied, ev.q_simple[tied], ev.n_switch[tied]))
        idx = int(tied[order[0]])
    else:
        idx = int(tied[0])

    chosen = tuple(int(x) for x in candidates[idx])
    return StepDecision(
        chosen=chosen,
        o_term=float(ev.o_term[idx]),
        p_term=float(ev.p_term[idx]),
        alpha_p=float(ev.alpha_p[idx]),
        q_term=float(ev.q_term[idx]),
        objective=float(ev.objective[idx]),
        switched_mask=tuple(bool(x) for x in ev.switched[idx]),
        v_ref=float(v_ref_k),
        current_sign=current_sign,
        state=state.advance(chosen),
    )


def nlm_step(state: ModulatorState, v_ref_k: float, cfg: ConverterConfig) -> StepDecision:
    """Plain nearest-level modulation step (no penalties)."""
    return cnlm_step(state, v_ref_k, cfg, NLM_PENALTY)


def objective_of(candidate, state: ModulatorState, v_ref_k: float, cfg: ConverterConfig,
                 pcfg: PenaltyConfig, current_sign: int = 0) -> float:
    """Objective of a single candidate, assembled from the scalar term functions."""
    p = term_P(candidate, state, pcfg)
    if math.isinf(p):
        return math.inf
    s = check_switch_vector(candidate, cfg.n_modules)
    if isinstance(pcfg.alpha, tuple):
        alpha_p = 0.0
        single = replace(pcfg, alpha=0.0)
        for n, a in enumerate(pcfg.alpha):
            only_n = tuple(s[j] if j == n else state.prev[j] for j in range(len(s)))
            alpha_p += a * term_P(only_n, state, single)
    else:
        alpha_p = pcfg.alpha * p
    return (term_O(s, v_ref_k, cfg, pcfg) + alpha_p
            + pcfg.beta * term_Q(s, state, cfg, pcfg, current_sign))
