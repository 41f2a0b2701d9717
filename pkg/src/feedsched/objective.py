"""Attention potential of a broadcast schedule over a follower population.

A follower logging in at the end of slot ``sigma`` sees one day of posts,
newest first: the cluster at position i originates from broadcast slot
``(sigma - i) mod S`` with that slot's competitor posts stacked directly
above it. A producer post is seen when the follower both scrolls deep
enough and does not skip its cluster; the attention potential of a schedule
is the expected number of producer posts seen, summed over followers with
their weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    FollowerProfile,
    ProblemInstance,
    Schedule,
    cluster_survival,
    follower_survival,
)

__all__ = [
    "ClusterView",
    "AttentionBreakdown",
    "timeline_view",
    "cluster_attention",
    "attention_potential",
    "attention_total",
    "heatmap",
]


@dataclass(frozen=True)
class ClusterView:
    """One producer cluster as seen on a follower's timeline.

    position         -- cluster index from the top (0 = newest)
    producer_count   -- number of producer posts in the cluster
    competitor_above -- competitor posts sitting directly above the cluster
    depth_offset     -- total posts above the cluster's first post
    source_slot      -- broadcast slot the cluster originated from
    """

    position: int
    producer_count: int
    competitor_above: float
    depth_offset: float
    source_slot: int


@dataclass(frozen=True)
class AttentionBreakdown:
    """Attention of one schedule, broken down per cluster and follower.

    per_cluster     -- (slots, followers) matrix of raw per-cluster attention
    per_follower    -- weight-scaled attention totals per follower
    per_source_slot -- weight-scaled attention re-attributed to the broadcast
                       slot each cluster originated from
    total           -- weighted grand total
    """

    per_cluster: np.ndarray
    per_follower: np.ndarray
    per_source_slot: np.ndarray
    total: float


def timeline_view(schedule: Schedule, follower: FollowerProfile) -> list[ClusterView]:
    """Lay out the schedule on a follower's timeline, newest cluster first."""
    posts = schedule.posts
    slots = len(posts)
    if len(follower.competitor_load) != slots:
        raise ValueError(
            f"schedule has {slots} slots but follower {follower.id!r} has a "
            f"competitor load of length {len(follower.competitor_load)}"
        )
    views = []
    consumed = 0.0
    for i in range(slots):
        s = (follower.sigma - i) % slots
        x = posts[s]
        v = follower.competitor_load[s]
        z = consumed + v
        views.append(ClusterView(i, x, v, z, s))
        consumed = z + x
    return views


def cluster_attention(
    view: ClusterView,
    follower: FollowerProfile,
    *,
    follower_family: str = "geometric",
    follower_p: float = 1.0,
    cluster_family: str = "geometric",
    cluster_p: float = 1.0,
    cluster_shifted: bool = True,
) -> float:
    """Expected number of posts seen within one cluster (0 for empty clusters)."""
    x = view.producer_count
    if x == 0:
        return 0.0
    keep = cluster_survival(
        follower, x, family=cluster_family, p=cluster_p, shifted=cluster_shifted
    )
    if keep == 0.0:
        return 0.0
    z = view.depth_offset
    seen = 0.0
    for k in range(1, x + 1):
        seen += follower_survival(follower, z + k, family=follower_family, p=follower_p)
    return keep * seen


def _family_kwargs(instance: ProblemInstance) -> dict:
    return {
        "follower_family": instance.follower_survival_family,
        "follower_p": instance.follower_survival_p,
        "cluster_family": instance.cluster_survival_family,
        "cluster_p": instance.cluster_survival_p,
        "cluster_shifted": instance.cluster_survival_shifted,
    }


def attention_potential(schedule: Schedule, instance: ProblemInstance) -> AttentionBreakdown:
    """Evaluate the schedule against the whole population, with full breakdown."""
    slots = instance.slots
    if len(schedule.posts) != slots:
        raise ValueError(
            f"schedule has {len(schedule.posts)} slots, instance expects {slots}"
        )
    n = len(instance.followers)
    kwargs = _family_kwargs(instance)
    per_cluster = np.zeros((slots, n))
    per_follower = np.zeros(n)
    per_source_slot = np.zeros(slots)
    for j, f in enumerate(instance.followers):
        raw = 0.0
        for view in timeline_view(schedule, f):
            fij = cluster_attention(view, f, **kwargs)
            per_cluster[view.position, j] = fij
            per_source_slot[view.source_slot] += f.gamma * fij
            raw += fij
        per_follower[j] = f.gamma * raw
    total = float(per_follower.sum())
    for arr in (per_cluster, per_follower, per_source_slot):
        arr.flags.writeable = False
    return AttentionBreakdown(per_cluster, per_follower, per_source_slot, total)


@lru_cache(maxsize=32)
def _prepared(instance: ProblemInstance):
    # Per-follower cluster-order views of the static data, so optimizer loops
    # only touch the schedule.
    prep = []
    for f in instance.followers:
        order = tuple((f.sigma - i) % instance.slots for i in range(instance.slots))
        loads = tuple(f.competitor_load[s] for s in order)
        prep.append((order, loads, 1.0 - f.rho, f.delta, f.gamma))
    return tuple(prep)


def attention_total(schedule: Schedule, instance: ProblemInstance) -> float:
    """Population total only; the hot path for optimizer loops.

    Uses a closed form of the geometric inner sum when both survival families
    are geometric, and falls back to the generic evaluation otherwise.
    """
    posts = schedule.posts
    if len(posts) != instance.slots:
        raise ValueError(
            f"schedule has {len(posts)} slots, instance expects {instance.slots}"
        )
    if (
        instance.follower_survival_family != "geometric"
        or instance.cluster_survival_family != "geometric"
    ):
        return attention_potential(schedule, instance).total
    shifted = instance.cluster_survival_shifted
    total = 0.0
    for order, loads, q, delta, gamma in _prepared(instance):
        acc = 0.0
        depth = 0.0
        for s, c in zip(order, loads):
            x = posts[s]
            z = depth + c
            if x:
                if q == 0.0:
                    inner = 0.0
                elif q == 1.0:
                    inner = float(x)
                else:
                    # sum of q^(z+k) for k = 1..x
                    inner = q**z * (q - q ** (x + 1)) / (1.0 - q)
                keep = delta ** (x - 1) if shifted else delta**x
                acc += keep * inner
            depth = z + x
        total += gamma * acc
    return total


def heatmap(
    schedule: Schedule, instance: ProblemInstance, mean_center: bool = False
) -> np.ndarray:
    """(broadcast slot x login slot) matrix of weighted attention contributions.

    Cell (s, h) aggregates the attention earned by posts broadcast in slot s
    on the timelines of followers logging in at slot h. With `mean_center`,
    each row has its mean subtracted.
    """
    slots = instance.slots
    bd = attention_potential(schedule, instance)
    grid = np.zeros((slots, slots))
    for j, f in enumerate(instance.followers):
        for i in range(slots):
            grid[(f.sigma - i) % slots, f.sigma] += f.gamma * bd.per_cluster[i, j]
    if mean_center:
        grid = grid - grid.mean(axis=1, keepdims=True)
    return grid
