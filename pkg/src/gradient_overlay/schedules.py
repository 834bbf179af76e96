"""Peer-sampling probability schedules.

A schedule gives the per-node, per-target sampling probability p_t as a
function of t = 0, 1, 2, ... The gossip engine runs ticks t = 1, 2, ... and
requires 0 < N*p_t < 1 at every tick it runs; the chain analysis follows
the matrix-product convention with steps indexed from 0. The two grids
coincide for constant schedules. Keeping p_0 out of the engine's reach
matters for decaying schedules whose leading value sits exactly on the
N*p = 1 boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


class ScheduleError(ValueError):
    """A sampling schedule violates 0 < N*p_t < 1 (or is malformed)."""


@dataclass(frozen=True)
class ConstantSchedule:
    """p_t = p for all t."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ScheduleError(f"constant probability must lie in (0, 1), got {self.p}")

    def probability_at(self, t: int) -> float:
        return self.p

    def probabilities(self, start: int, stop: int) -> np.ndarray:
        return np.full(stop - start, self.p)


@dataclass(frozen=True)
class PolynomialDecaySchedule:
    """p_t = base / (1 + t/scale)**exponent."""

    base: float
    scale: float
    exponent: float

    def __post_init__(self):
        if not 0.0 < self.base < 1.0:
            raise ScheduleError(f"decay base must lie in (0, 1), got {self.base}")
        if self.scale <= 0.0:
            raise ScheduleError(f"decay scale must be positive, got {self.scale}")
        if self.exponent < 0.0:
            raise ScheduleError(f"decay exponent must be nonnegative, got {self.exponent}")

    def probability_at(self, t: int) -> float:
        return self.base / (1.0 + t / self.scale) ** self.exponent

    def probabilities(self, start: int, stop: int) -> np.ndarray:
        t = np.arange(start, stop, dtype=float)
        return self.base / (1.0 + t / self.scale) ** self.exponent


@dataclass(frozen=True)
class TabulatedSchedule:
    """Explicit p_t table; beyond the table the tail value applies.

    tail=None holds the last tabulated value forever.
    """

    values: tuple[float, ...]
    tail: float | None = None

    def __post_init__(self):
        if not self.values:
            raise ScheduleError("tabulated schedule needs at least one value")
        for k, v in enumerate(self.values):
            if not 0.0 < v < 1.0:
                raise ScheduleError(f"tabulated p_{k} must lie in (0, 1), got {v}")
        if self.tail is not None and not 0.0 < self.tail < 1.0:
            raise ScheduleError(f"tail probability must lie in (0, 1), got {self.tail}")

    @property
    def tail_value(self) -> float:
        return self.values[-1] if self.tail is None else self.tail

    def probability_at(self, t: int) -> float:
        if t < len(self.values):
            return self.values[t]
        return self.tail_value

    def probabilities(self, start: int, stop: int) -> np.ndarray:
        out = np.full(stop - start, self.tail_value)
        head = min(len(self.values), stop) - start
        if head > 0:
            out[:head] = self.values[start:start + head]
        return out


SamplingSchedule = Union[ConstantSchedule, PolynomialDecaySchedule, TabulatedSchedule]


def check_schedule(schedule: SamplingSchedule, n_nodes: int, t: int) -> float:
    """Return p_t after verifying 0 < N*p_t < 1; raise ScheduleError otherwise."""
    p = schedule.probability_at(t)
    if p <= 0.0 or n_nodes * p >= 1.0:
        raise ScheduleError(
            f"schedule invalid at t={t}: need 0 < N*p < 1, got N*p = {n_nodes * p}"
        )
    return p


def validate_schedule(schedule: SamplingSchedule, n_nodes: int) -> None:
    """Check 0 < N*p_t < 1 for every engine tick t >= 1.

    The families here are non-increasing in t, so checking t = 1 covers the
    rest; tabulated values are checked entry by entry (index 0 belongs to
    the analysis grid only).
    """
    if isinstance(schedule, TabulatedSchedule):
        for t in range(1, len(schedule.values)):
            check_schedule(schedule, n_nodes, t)
        if n_nodes * schedule.tail_value >= 1.0:
            raise ScheduleError(
                f"tail violates N*p < 1: N*p = {n_nodes * schedule.tail_value}"
            )
    else:
        check_schedule(schedule, n_nodes, 1)
