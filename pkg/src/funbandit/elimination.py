"""Batch Elimination: schedules, bandit instances and a single run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .distributions import DistributionSpec, Rng, sample_n, true_functional
from .errors import DomainError, FunBanditError, InsufficientBudget, InternalError
from .estimators import FunctionalSpec, SampleBuffer, estimate

# A sampler maps (numpy Generator, n) to n rewards.
Sampler = Callable[[np.random.Generator, int], np.ndarray]
Arm = Union[DistributionSpec, Sampler]


@dataclass(frozen=True)
class Schedule:
    """Elimination plan: ``x[l]`` arms are dropped after round ``l``."""

    K: int
    x: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        if self.K < 2:
            raise DomainError(f"need K >= 2 arms, got {self.K}")
        if not self.x:
            raise DomainError("schedule needs at least one round")
        if any(v < 0 for v in self.x):
            raise DomainError(f"elimination counts must be nonnegative: {self.x}")
        if sum(self.x) != self.K - 1:
            raise DomainError(f"elimination counts sum to {sum(self.x)}, need K-1 = {self.K - 1}")
        for remaining, drop in zip(self.survivors(), self.x):
            if remaining - drop < 1:
                raise DomainError(f"round would drop {drop} of {remaining} arms")

    @property
    def L(self) -> int:
        return len(self.x)

    @property
    def H(self) -> int:
        return compute_H(self)

    def survivors(self) -> list[int]:
        """``|S_l|`` for each round ``l`` (arms alive at the start of the round)."""
        sizes, alive = [], self.K
        for drop in self.x:
            sizes.append(alive)
            alive -= drop
        return sizes

    def pulls_per_round(self, T: int) -> list[int]:
        per_arm = T // self.H
        return [s * per_arm for s in self.survivors()]


def compute_H(schedule: Schedule) -> int:
    """``L K - sum_l x_l (L - l)`` with rounds numbered from 1."""
    L = schedule.L
    return L * schedule.K - sum(x * (L - l) for l, x in enumerate(schedule.x, start=1))


def schedule_successive_rejects(K: int) -> Schedule:
    if K < 2:
        raise DomainError(f"need K >= 2 arms, got {K}")
    return Schedule(K, (1,) * (K - 1))


def schedule_sequential_halving(K: int) -> Schedule:
    if K < 2:
        raise DomainError(f"need K >= 2 arms, got {K}")
    L = (K - 1).bit_length()  # ceil(log2 K)
    x: list[int] = []
    for _ in range(L):
        x.append((K - sum(x)) // 2)
    if sum(x) != K - 1:
        raise InternalError(f"halving schedule for K={K} sums to {sum(x)}")
    return Schedule(K, tuple(x))


def make_schedule(K: int, policy: str, x: Sequence[int] | None = None) -> Schedule:
    if policy == "sr":
        return schedule_successive_rejects(K)
    if policy == "sh":
        return schedule_sequential_halving(K)
    if policy == "custom":
        if x is None:
            raise DomainError("custom schedule needs an x list")
        return Schedule(K, tuple(x))
    raise DomainError(f"unknown schedule policy {policy!r}")


def eliminate_weakest(
    estimates: Mapping[int, float], survivors: Sequence[int], x: int
) -> tuple[list[int], list[int]]:
    """Split ``survivors`` into (kept, eliminated), dropping the ``x`` lowest estimates.

    Ties go out lowest index first. Both lists keep the input order.
    """
    if not 0 <= x < len(survivors):
        raise DomainError(f"cannot eliminate {x} of {len(survivors)} arms")
    ranked = sorted(survivors, key=lambda i: (estimates[i], i))
    out = set(ranked[:x])
    kept = [i for i in survivors if i not in out]
    eliminated = [i for i in survivors if i in out]
    return kept, eliminated


@dataclass
class BanditInstance:
    """Arms plus a functional, with their ground-truth scores and gaps."""

    arms: list[DistributionSpec]
    functional: FunctionalSpec
    values: list[float] = field(init=False)

    def __post_init__(self) -> None:
        if len(self.arms) < 2:
            raise DomainError("a bandit instance needs at least two arms")
        self.values = [true_functional(a, self.functional) for a in self.arms]

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def best(self) -> int:
        return int(np.argmax(self.values))

    @property
    def gaps(self) -> list[float]:
        top = self.values[self.best]
        return [top - v for v in self.values]

    @property
    def gap_min(self) -> float:
        """Smallest gap over suboptimal arms (0 when the best arm is not unique)."""
        b = self.best
        return min(g for i, g in enumerate(self.gaps) if i != b)

    @property
    def gap_max(self) -> float:
        return max(self.gaps)


@dataclass
class RoundRecord:
    survivors: list[int]
    estimates: dict[int, float]
    eliminated: list[int]


@dataclass
class RunResult:
    recommended: int
    pulls_used: int
    rounds: list[RoundRecord]
    per_arm_pulls: list[int]


def _draw(arm: Arm, rng: Rng, n: int) -> np.ndarray:
    if callable(arm):
        return np.asarray(arm(rng.generator, n), dtype=float)
    return sample_n(arm, rng, n)


def run_batch_elimination(
    arms: Union[BanditInstance, Sequence[Arm]],
    schedule: Schedule,
    T: int,
    functional: FunctionalSpec,
    rng: Rng,
) -> RunResult:
    """Run one Batch Elimination pass with budget ``T``.

    Each round pulls every survivor ``floor(T/H)`` fresh times, re-estimates
    on the arm's whole sample history and drops the ``x_l`` weakest arms.
    Arm ``i`` draws from the sub-stream ``rng.child("arm:i")``.
    """
    arm_list = arms.arms if isinstance(arms, BanditInstance) else list(arms)
    if len(arm_list) != schedule.K:
        raise DomainError(f"schedule is for K={schedule.K} arms, got {len(arm_list)}")
    per_round = T // schedule.H
    if per_round < 1:
        raise InsufficientBudget(f"floor(T/H) = floor({T}/{schedule.H}) = 0")

    streams = [rng.child(f"arm:{i}") for i in range(schedule.K)]
    buffers = [SampleBuffer() for _ in range(schedule.K)]
    alive = list(range(schedule.K))
    rounds: list[RoundRecord] = []
    for l, drop in enumerate(schedule.x, start=1):
        ests: dict[int, float] = {}
        for i in alive:
            buffers[i].append(_draw(arm_list[i], streams[i], per_round))
            try:
                ests[i] = estimate(functional, buffers[i])
            except FunBanditError as exc:
                raise type(exc)(f"round {l}, arm {i}: {exc}") from exc
        kept, gone = eliminate_weakest(ests, alive, drop)
        rounds.append(RoundRecord(list(alive), ests, gone))
        alive = kept

    pulls = [b.N for b in buffers]
    return RunResult(alive[0], sum(pulls), rounds, pulls)
