"""Adam, the 1-cycle learning-rate policy, and the temperature schedule.

Schedules are evaluated per epoch and are pure functions; AdamState is
owned by a single trainer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AdamState",
    "adam_step",
    "LrSchedule",
    "one_cycle_lr",
    "TemperatureSchedule",
    "annealed_temperature",
]


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, **kwargs) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **kwargs,
        )


def adam_step(params, grads, state: AdamState, lr: float):
    """One bias-corrected Adam update, applied to `params` in place."""
    if not lr > 0.0:
        raise ValueError("learning rate must be positive")
    if not (len(params) == len(grads) == len(state.m)):
        raise ValueError("parameter / gradient / state lists disagree")
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass
class LrSchedule:
    """1-cycle policy: linear warmup eta0/10 -> eta0 over the first half-cycle,
    linear decay eta0 -> eta0/100 over the second, constant eta0/100 after."""

    lr0: float
    cycle_len: int
    total_epochs: int


def one_cycle_lr(epoch: int, sched: LrSchedule) -> float:
    if not 0 <= epoch < sched.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {sched.total_epochs})")
    half = sched.cycle_len / 2.0
    lo, peak, tail = sched.lr0 / 10.0, sched.lr0, sched.lr0 / 100.0
    if epoch < half:
        return lo + (peak - lo) * (epoch / half)
    if epoch < sched.cycle_len:
        return peak + (tail - peak) * ((epoch - half) / half)
    return tail


@dataclass
class TemperatureSchedule:
    """Hold T0 for the first half-cycle, decay linearly to 1.0 by the end of
    the cycle, then stay at 1.0. With annealed=False the temperature is T0
    throughout."""

    t0: float
    cycle_len: int
    total_epochs: int
    annealed: bool = True

    def __post_init__(self):
        if self.t0 < 1.0:
            raise ValueError("initial temperature must be >= 1")


def annealed_temperature(epoch: int, sched: TemperatureSchedule) -> float:
    if not 0 <= epoch < sched.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {sched.total_epochs})")
    if not sched.annealed:
        return sched.t0
    half = sched.cycle_len / 2.0
    if epoch < half:
        return sched.t0
    if epoch < sched.cycle_len:
        return sched.t0 + (1.0 - sched.t0) * ((epoch - half) / half)
    return 1.0
