"""Schedule construction: greedy marginal allocation, exhaustive search for
small instances, popular heuristic generators, and seeded multistart."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import ProblemInstance, Schedule
from .objective import attention_total

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "EnumerationCapError",
    "OptimizationReport",
    "marginal_allocation",
    "brute_force",
    "heuristic",
    "multistart",
    "window_slots",
]

DEFAULT_ENUMERATION_CAP = 20_000_000

HEURISTICS = ("uniform", "peak", "graveyard", "smart")

DEFAULT_NIGHT_HOURS = (23, 6)
DEFAULT_LUNCH_HOURS = (12, 13)


class EnumerationCapError(RuntimeError):
    """Raised when exhaustive search would exceed the configured cap."""


@dataclass(frozen=True)
class OptimizationReport:
    """Outcome of one optimization run.

    trajectory holds (slot, gain) per accepted greedy step; terminated_by is
    "no-gain" or "budget" for greedy runs and "exhausted" for full enumeration.
    """

    schedule: Schedule
    total: float
    trajectory: tuple[tuple[int, float], ...]
    evaluations: int
    terminated_by: str


def marginal_allocation(
    instance: ProblemInstance, initial: Schedule | None = None
) -> OptimizationReport:
    """Greedy hill climb: repeatedly add one post to the slot with the largest
    objective gain, stopping when no slot improves or the budget is spent.

    Ties in the argmax break toward the lowest slot index. Only strictly
    positive gains are accepted.
    """
    slots, budget = instance.slots, instance.budget
    current = initial if initial is not None else Schedule.zeros(slots)
    if len(current.posts) != slots:
        raise ValueError(
            f"initial schedule has {len(current.posts)} slots, expected {slots}"
        )
    if current.spend > budget:
        raise ValueError(
            f"initial schedule spends {current.spend}, exceeding the budget {budget}"
        )
    evaluations = 1
    current_total = attention_total(current, instance)
    trajectory: list[tuple[int, float]] = []
    terminated_by = "budget"
    while True:
        if current.spend >= budget:
            terminated_by = "budget"
            break
        best_slot = -1
        best_total = current_total
        best_gain = 0.0
        for k in range(slots):
            candidate_total = attention_total(current.with_added(k), instance)
            evaluations += 1
            gain = candidate_total - current_total
            if gain > best_gain:
                best_slot, best_total, best_gain = k, candidate_total, gain
        if best_slot < 0:
            terminated_by = "no-gain"
            break
        current = current.with_added(best_slot)
        current_total = best_total
        trajectory.append((best_slot, best_gain))
    return OptimizationReport(
        current, current_total, tuple(trajectory), evaluations, terminated_by
    )


def _feasible_schedules(slots: int, budget: int):
    """All schedules with spend <= budget, in lexicographic order."""
    posts = [0] * slots

    def rec(idx: int, remaining: int):
        if idx == slots:
            yield Schedule(tuple(posts))
            return
        for v in range(remaining + 1):
            posts[idx] = v
            yield from rec(idx + 1, remaining - v)
        posts[idx] = 0

    yield from rec(0, budget)


def brute_force(
    instance: ProblemInstance, cap: int = DEFAULT_ENUMERATION_CAP
) -> OptimizationReport:
    """Exact optimum by full enumeration; ties keep the lexicographically
    smallest schedule. Refuses instances whose candidate count exceeds `cap`."""
    slots, budget = instance.slots, instance.budget
    n_candidates = math.comb(budget + slots, slots)
    if n_candidates > cap:
        raise EnumerationCapError(
            f"enumeration would visit {n_candidates} schedules, "
            f"exceeding the cap of {cap}"
        )
    best_schedule: Schedule | None = None
    best_total = -math.inf
    evaluations = 0
    for candidate in _feasible_schedules(slots, budget):
        total = attention_total(candidate, instance)
        evaluations += 1
        if total > best_total:
            best_schedule, best_total = candidate, total
    assert best_schedule is not None
    return OptimizationReport(best_schedule, best_total, (), evaluations, "exhausted")


def window_slots(first_hour: int, last_hour: int, slots: int) -> list[int]:
    """Slot indices covered by an inclusive, wrapping hour window."""
    hours = []
    h = first_hour % 24
    while True:
        hours.append(h)
        if h == last_hour % 24:
            break
        h = (h + 1) % 24
    out: list[int] = []
    for h in hours:
        s = h * slots // 24
        if s not in out:
            out.append(s)
    return out


def _spread(n: int, window: list[int], slots: int) -> Schedule:
    base, rem = divmod(n, len(window))
    posts = [0] * slots
    for k, s in enumerate(window):
        posts[s] = base + (1 if k < rem else 0)
    return Schedule(tuple(posts))


def heuristic(
    kind: str,
    instance: ProblemInstance,
    n: int,
    activity=None,
    *,
    night_hours: tuple[int, int] = DEFAULT_NIGHT_HOURS,
    lunch_hours: tuple[int, int] = DEFAULT_LUNCH_HOURS,
) -> Schedule:
    """Popular scheduling recipes.

    uniform   -- even spread across all slots, remainder to the lowest indices
    peak      -- n posts proportional to the given per-slot activity weights
                 (largest-remainder rounding)
    graveyard -- even spread across the late-night window
    smart     -- even spread across the lunch window plus the night window
    """
    if kind not in HEURISTICS:
        raise ValueError(f"unknown heuristic {kind!r}; expected one of {HEURISTICS}")
    slots = instance.slots
    if not 0 <= n <= instance.budget:
        raise ValueError(f"spend {n} must lie in [0, budget={instance.budget}]")
    if kind == "uniform":
        base, rem = divmod(n, slots)
        return Schedule(tuple(base + (1 if s < rem else 0) for s in range(slots)))
    if kind == "peak":
        if activity is None:
            raise ValueError("the peak heuristic requires per-slot activity weights")
        weights = [float(a) for a in activity]
        if len(weights) != slots:
            raise ValueError(
                f"activity weights have length {len(weights)}, expected {slots}"
            )
        if any(w < 0 for w in weights):
            raise ValueError("activity weights must be >= 0")
        total_w = sum(weights)
        if n > 0 and total_w <= 0:
            raise ValueError("activity weights must not all be zero")
        posts = [0] * slots
        if n > 0:
            quotas = [n * w / total_w for w in weights]
            posts = [int(q) for q in quotas]
            leftovers = sorted(
                range(slots), key=lambda s: (-(quotas[s] - posts[s]), s)
            )
            for s in leftovers[: n - sum(posts)]:
                posts[s] += 1
        return Schedule(tuple(posts))
    night = window_slots(*night_hours, slots)
    if kind == "graveyard":
        return _spread(n, night, slots)
    lunch = window_slots(*lunch_hours, slots)
    combined = lunch + [s for s in night if s not in lunch]
    return _spread(n, combined, slots)


def multistart(instance: ProblemInstance, restarts: int, seed: int) -> OptimizationReport:
    """Best of several greedy runs: one from the zero schedule plus seeded
    random feasible starting points. Deterministic for a fixed seed; the
    reported evaluation count covers all restarts."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    slots, budget = instance.slots, instance.budget
    best: OptimizationReport | None = None
    evaluations = 0
    for r in range(restarts):
        if r == 0:
            initial = Schedule.zeros(slots)
        else:
            spend = int(rng.integers(0, budget + 1))
            counts = rng.multinomial(spend, [1.0 / slots] * slots)
            initial = Schedule(tuple(int(c) for c in counts))
        report = marginal_allocation(instance, initial)
        evaluations += report.evaluations
        if best is None or report.total > best.total:
            best = report
    assert best is not None
    return replace(best, evaluations=evaluations)
