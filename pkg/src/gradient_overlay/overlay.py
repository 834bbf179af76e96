"""Overlay domain model: utility classes, per-node similar views, the
different-utility count metric, and the gradient-convergence predicate.

Node ids are dense integers 0..N-1. Utility levels are 1..n, assigned
blockwise (the first m_1 ids get level 1, and so on); an optional seeded
shuffle permutes the assignment. Placement is irrelevant to the dynamics,
blockwise keeps class bookkeeping trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import TAG_TOPOLOGY_INIT, stream


class TopologyError(ValueError):
    """Invalid utility configuration or view structure."""


@dataclass(frozen=True)
class UtilityConfig:
    """Population layout: one entry per utility level, value = class size.

    Level u (1-based) has class_sizes[u-1] nodes; that is also the similar-view
    capacity of every node at level u. Each class needs at least 2 nodes (a
    node must have a same-level peer besides itself) and no class may be
    larger than N-1 (a view cannot hold more peers than exist).
    """

    class_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_sizes", tuple(int(s) for s in self.class_sizes))
        if not self.class_sizes:
            raise TopologyError("at least one utility level is required")
        total = sum(self.class_sizes)
        for u, size in enumerate(self.class_sizes, start=1):
            if size < 2:
                raise TopologyError(f"utility level {u} has class size {size}; need >= 2")
            if size > total - 1:
                raise TopologyError(
                    f"utility level {u} has class size {size} but only "
                    f"{total - 1} other nodes exist to fill a view"
                )

    @classmethod
    def uniform(cls, levels: int, class_size: int) -> "UtilityConfig":
        return cls(class_sizes=(class_size,) * levels)

    @property
    def num_levels(self) -> int:
        return len(self.class_sizes)

    @property
    def num_nodes(self) -> int:
        return sum(self.class_sizes)

    @property
    def max_class_size(self) -> int:
        return max(self.class_sizes)

    def capacity(self, level: int) -> int:
        return self.class_sizes[level - 1]


class NodeTable:
    """Maps node id -> utility level, with fast per-class lookups."""

    def __init__(self, levels: np.ndarray, config: UtilityConfig):
        self.levels = np.asarray(levels, dtype=np.int64)
        self.config = config
        counts = np.bincount(self.levels, minlength=config.num_levels + 1)[1:]
        if not np.array_equal(counts, np.asarray(config.class_sizes)):
            raise TopologyError("level assignment does not match the configured class sizes")

    @classmethod
    def blockwise(cls, config: UtilityConfig, shuffle_seed: int | None = None) -> "NodeTable":
        levels = np.repeat(
            np.arange(1, config.num_levels + 1), np.asarray(config.class_sizes)
        )
        if shuffle_seed is not None:
            rng = np.random.default_rng(shuffle_seed)
            levels = rng.permutation(levels)
        return cls(levels, config)

    def level_of(self, i: int) -> int:
        if not 0 <= i < len(self.levels):
            raise KeyError(f"unknown node id {i}")
        return int(self.levels[i])

    def distance(self, i: int, j: int) -> int:
        return abs(self.level_of(i) - self.level_of(j))

    def class_members(self, level: int) -> np.ndarray:
        return np.flatnonzero(self.levels == level)


@dataclass
class SimilarView:
    """One node's preferred-neighbor set; always full, never contains the owner."""

    owner: int
    capacity: int
    members: set[int] = field(default_factory=set)

    def validate(self) -> None:
        if len(self.members) != self.capacity:
            raise TopologyError(
                f"view of node {self.owner} holds {len(self.members)} members, "
                f"capacity is {self.capacity}"
            )
        if self.owner in self.members:
            raise TopologyError(f"view of node {self.owner} contains its owner")


@dataclass
class TopologyState:
    """The directed overlay: population plus one similar view per node."""

    config: UtilityConfig
    nodes: NodeTable
    views: list[SimilarView]
    tick: int = 0

    def view_of(self, i: int) -> SimilarView:
        if not 0 <= i < len(self.views):
            raise KeyError(f"unknown node id {i}")
        return self.views[i]

    def validate(self) -> None:
        n = self.config.num_nodes
        for view in self.views:
            view.validate()
            for j in view.members:
                if not 0 <= j < n:
                    raise TopologyError(f"view of node {view.owner} references unknown node {j}")


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-node gradient conditions.

    one_different[i]: node i's view holds exactly one different-utility member.
    next_level_link[i]: that single member sits one level above i (vacuously
    true for nodes at the top level, whose upward link is unconstrained).
    """

    one_different: tuple[bool, ...]
    next_level_link: tuple[bool, ...]
    converged: bool


def build_initial_topology(config: UtilityConfig, seed: int) -> TopologyState:
    """Fill every view with capacity(level) distinct uniform peers (never the owner).

    Deterministic for a fixed seed; the draw stream is derived from the seed
    with a purpose tag so other consumers of the same seed stay independent.
    """
    rng = stream(seed, TAG_TOPOLOGY_INIT)
    nodes = NodeTable.blockwise(config)
    n = config.num_nodes
    views = []
    for i in range(n):
        cap = config.capacity(nodes.level_of(i))
        picks = rng.choice(n - 1, size=cap, replace=False)
        members = {int(k) if k < i else int(k) + 1 for k in picks}
        views.append(SimilarView(owner=i, capacity=cap, members=members))
    return TopologyState(config=config, nodes=nodes, views=views, tick=0)


def x_metric(state: TopologyState, i: int) -> int:
    """Number of members of i's view whose utility differs from i's."""
    level = state.nodes.level_of(i)
    view = state.view_of(i)
    return sum(1 for j in view.members if state.nodes.levels[j] != level)


def check_gradient_converged(state: TopologyState) -> ConvergenceReport:
    """Evaluate both gradient conditions on the current state.

    Overall convergence requires every node to hold exactly one
    different-utility member, and every node below the top level to hold
    its single different member exactly one level up.
    """
    top = state.config.num_levels
    one_different = []
    next_level_link = []
    for i in range(state.config.num_nodes):
        level = state.nodes.level_of(i)
        others = [int(state.nodes.levels[j]) for j in state.view_of(i).members
                  if state.nodes.levels[j] != level]
        a = len(others) == 1
        if level == top:
            b = True
        else:
            b = a and others[0] == level + 1
        one_different.append(a)
        next_level_link.append(b)
    converged = all(one_different) and all(next_level_link)
    return ConvergenceReport(
        one_different=tuple(one_different),
        next_level_link=tuple(next_level_link),
        converged=converged,
    )
