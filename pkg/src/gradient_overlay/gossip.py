"""Gossip dynamics: per-tick peer sampling and preference-driven view updates.

Each tick, every node independently draws at most one uniform peer (with
probability N*p_t) and folds it into its similar view when the candidate has
equal-or-higher utility and is no farther than the current worst member; the
worst member is evicted. The per-node count of different-utility view members
never increases and is absorbed at 1.

Sampling and eviction tie-breaks run on separate seed-derived streams, so a
whole-tick batch of sampling draws is byte-identical to per-node scalar
draws regardless of how many tie-breaks fire in between.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .overlay import (
    TopologyState,
    UtilityConfig,
    build_initial_topology,
    check_gradient_converged,
    x_metric,
)
from .rng import (
    TAG_CHAIN_ENSEMBLE,
    TAG_EVICTION_TIEBREAK,
    TAG_PEER_SAMPLING,
    stream,
)
from .schedules import SamplingSchedule, check_schedule, validate_schedule


@dataclass
class RngStreams:
    """The rng state of a run: one stream per randomized purpose."""

    seed: int
    sampling: np.random.Generator
    tiebreak: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngStreams":
        return cls(
            seed=seed,
            sampling=stream(seed, TAG_PEER_SAMPLING),
            tiebreak=stream(seed, TAG_EVICTION_TIEBREAK),
        )


def sample_peer(
    t: int, schedule: SamplingSchedule, n_nodes: int, rng: np.random.Generator
) -> int | None:
    """Draw the tick-t random view: a uniform node with probability N*p_t, else None.

    A single uniform variate r does both jobs: the view is non-empty when
    r < N*p_t, and floor(r/p_t) is then uniform on 0..N-1 (each node is
    returned with probability exactly p_t). Consumes one draw always.
    """
    p = check_schedule(schedule, n_nodes, t)
    r = rng.random()
    if r >= n_nodes * p:
        return None
    return min(int(r / p), n_nodes - 1)


def pick_eviction(
    owner_level: int,
    candidates: list[tuple[int, int]],
    rng: np.random.Generator,
) -> int:
    """Choose which (node, level) pair leaves a full view.

    The member at maximum utility distance goes; among those, the lowest
    utility goes (keeping upward links); remaining ties are broken uniformly.
    No rng draw is consumed when the tie set is a singleton.
    """
    max_d = max(abs(lv - owner_level) for _, lv in candidates)
    at_max = [(node, lv) for node, lv in candidates if abs(lv - owner_level) == max_d]
    low = min(lv for _, lv in at_max)
    ties = [node for node, lv in at_max if lv == low]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def improve_view(
    state: TopologyState, i: int, j: int, rng: np.random.Generator
) -> bool:
    """Offer sampled node j to node i's view; return whether the view changed.

    No-ops: j is i itself, or already a member. Acceptance requires
    U(j) >= U(i) and d(i,j) <= max_k d(i,k); the eviction then runs over the
    m+1 candidates including j, so j can lose the tie-break and leave the
    view unchanged (still False).
    """
    levels = state.nodes.levels
    ui = state.nodes.level_of(i)
    uj = state.nodes.level_of(j)
    view = state.view_of(i)
    if j == i or j in view.members:
        return False
    candidates = [(k, int(levels[k])) for k in view.members]
    max_d = max(abs(lv - ui) for _, lv in candidates)
    if uj < ui or abs(uj - ui) > max_d:
        return False
    candidates.append((j, uj))
    evicted = pick_eviction(ui, candidates, rng)
    if evicted == j:
        return False
    view.members.remove(evicted)
    view.members.add(j)
    return True


def tick(
    state: TopologyState,
    t: int,
    schedule: SamplingSchedule,
    streams: RngStreams,
    changed: list[int] | None = None,
) -> TopologyState:
    """Run one synchronous round: every node samples, then improves, in id order.

    Mutates and returns `state` (the engine owns it exclusively). Sampling
    draws are batched; the stream consumed is identical to calling
    sample_peer once per node in ascending id order.
    """
    n = state.config.num_nodes
    p = check_schedule(schedule, n, t)
    r = streams.sampling.random(n)
    for i in np.flatnonzero(r < n * p):
        j = min(int(r[i] / p), n - 1)
        if improve_view(state, int(i), j, streams.tiebreak) and changed is not None:
            changed.append(int(i))
    state.tick += 1
    return state


def harmonic(k: int) -> float:
    return sum(1.0 / n for n in range(1, k + 1))


def default_horizon(config: UtilityConfig, schedule: SamplingSchedule) -> int:
    """20x the worst-start expected absorption time for constant schedules,
    otherwise a flat 10^5 ticks."""
    from .schedules import ConstantSchedule

    if isinstance(schedule, ConstantSchedule):
        m = config.max_class_size
        return int(np.ceil(20.0 * harmonic(m - 1) / schedule.p))
    return 100_000


@dataclass
class GossipTrace:
    """Everything observable from one seeded run.

    x_series row t is the per-node different-utility count after t ticks
    (row 0 is the initial state); rows stop early once the gradient predicate
    holds. convergence_tick[i] is the first row where node i's count is 1
    (None if never within the run); gradient_tick is the first row where the
    full predicate holds (None if never).
    """

    x_series: np.ndarray
    convergence_tick: tuple[int | None, ...]
    gradient_tick: int | None
    horizon: int
    seed: int

    @property
    def ticks_run(self) -> int:
        return self.x_series.shape[0] - 1


def run_convergence(
    config: UtilityConfig,
    schedule: SamplingSchedule,
    seed: int,
    horizon: int | None = None,
) -> GossipTrace:
    """Build a fresh topology and gossip until gradient convergence or horizon."""
    if horizon is None:
        horizon = default_horizon(config, schedule)
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    n = config.num_nodes
    validate_schedule(schedule, n)

    state = build_initial_topology(config, seed)
    streams = RngStreams.from_seed(seed)

    x = np.array([x_metric(state, i) for i in range(n)], dtype=np.int16)
    rows = [x.copy()]
    conv: list[int | None] = [0 if x[i] == 1 else None for i in range(n)]
    gradient_tick = None
    if bool((x == 1).all()) and check_gradient_converged(state).converged:
        gradient_tick = 0

    t = 0
    while t < horizon and gradient_tick is None:
        t += 1
        changed: list[int] = []
        tick(state, t, schedule, streams, changed)
        for i in changed:
            x[i] = x_metric(state, i)
        rows.append(x.copy())
        for i in changed:
            if conv[i] is None and x[i] == 1:
                conv[i] = t
        if bool((x == 1).all()) and check_gradient_converged(state).converged:
            gradient_tick = t

    return GossipTrace(
        x_series=np.vstack(rows),
        convergence_tick=tuple(conv),
        gradient_tick=gradient_tick,
        horizon=horizon,
        seed=seed,
    )


@dataclass(frozen=True)
class ChainEnsemble:
    """Worst-start single-node runs, vectorized over many independent chains.

    hit_tick[c] is the first trace row where chain c's count reached 1
    (-1 if not within the horizon); snapshots maps a requested trace row to
    the per-chain counts at that row.
    """

    hit_tick: np.ndarray
    snapshots: dict[int, np.ndarray]
    observer_level: int
    chains: int


def simulate_view_chains(
    config: UtilityConfig,
    schedule: SamplingSchedule,
    chains: int,
    seed: int,
    horizon: int | None = None,
    observer_level: int = 1,
    record_at: tuple[int, ...] = (),
) -> ChainEnsemble:
    """Run many independent single-node views from the all-different start.

    One node's view evolution never depends on other nodes' views, so a
    single node against the static population is simulated exactly; starting
    with every member of a different utility is the worst case. All chains
    advance in lockstep via array ops; mechanics (uniform sampling, no-op on
    self/member hits, acceptance test, max-distance eviction with the
    lower-utility-first tie-break) mirror improve_view member for member.

    With horizon=None the run continues until every chain is absorbed and
    all requested snapshots are taken; give a horizon for schedules that are
    not almost-surely convergent.
    """
    n_nodes = config.num_nodes
    n_levels = config.num_levels
    u = observer_level
    m = config.capacity(u)
    sizes = np.asarray(config.class_sizes)
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    class_start, class_end = int(offsets[u - 1]), int(offsets[u])
    observer = class_start
    others = np.concatenate((np.arange(0, class_start), np.arange(class_end, n_nodes)))
    if len(others) < m:
        raise ValueError(
            f"worst start needs {m} different-utility nodes, only {len(others)} exist"
        )
    validate_schedule(schedule, n_nodes)

    levels_by_id = np.repeat(np.arange(1, n_levels + 1), sizes)
    dist_by_class = np.abs(np.arange(1, n_levels + 1) - u)
    # eviction priority: max distance first, lower utility first within a distance
    priority = np.array(sorted(range(1, n_levels + 1), key=lambda c: (-abs(c - u), c)))

    rng = stream(seed, TAG_CHAIN_ENSEMBLE)

    # worst-start views: m distinct uniform picks among the other-utility nodes
    view = np.zeros((chains, n_nodes), dtype=bool)
    picks = np.argpartition(rng.random((chains, len(others))), m - 1, axis=1)[:, :m]
    rows = np.repeat(np.arange(chains), m)
    view[rows, others[picks].ravel()] = True
    counts = np.zeros((chains, n_levels), dtype=np.int32)
    for c in range(1, n_levels + 1):
        counts[:, c - 1] = view[:, offsets[c - 1]:offsets[c]].sum(axis=1)

    hit = np.full(chains, -1, dtype=np.int64)
    snapshots: dict[int, np.ndarray] = {}
    pending = set(int(T) for T in record_at)
    x = (m - counts[:, u - 1]).astype(np.int16)
    if 0 in pending:
        snapshots[0] = x.copy()
        pending.discard(0)
    hit[x == 1] = 0

    chain_ids = np.arange(chains)
    t = 0
    while True:
        if (hit >= 0).all():
            # absorbed chains never move again; pending rows all look like now
            for T in sorted(pending):
                if horizon is None or T <= horizon:
                    snapshots[T] = x.copy()
            pending.clear()
            break
        if horizon is not None and t >= horizon:
            break
        p = check_schedule(schedule, n_nodes, t + 1)
        r = rng.random(chains)
        j = np.minimum((r / p).astype(np.int64), n_nodes - 1)
        act = (r < n_nodes * p) & (j != observer) & ~view[chain_ids, j]
        uj = levels_by_id[j]
        maxd = ((counts > 0) * dist_by_class).max(axis=1)
        accept = act & (uj >= u) & (np.abs(uj - u) <= maxd)

        idx = np.flatnonzero(accept)
        if idx.size:
            jj = j[idx]
            view[idx, jj] = True
            counts[idx, uj[idx] - 1] += 1
            occupied = counts[idx][:, priority - 1] > 0
            evict_class = priority[occupied.argmax(axis=1)]
            for c in np.unique(evict_class):
                grp = idx[evict_class == c]
                lo, hi = int(offsets[c - 1]), int(offsets[c])
                block = view[grp, lo:hi]
                cnt = counts[grp, c - 1]
                kth = (rng.random(len(grp)) * cnt).astype(np.int64)
                pos = (np.cumsum(block, axis=1) > kth[:, None]).argmax(axis=1)
                view[grp, lo + pos] = False
                counts[grp, c - 1] -= 1

        t += 1
        x = (m - counts[:, u - 1]).astype(np.int16)
        newly = (x == 1) & (hit < 0)
        hit[newly] = t
        if t in pending:
            snapshots[t] = x.copy()
            pending.discard(t)

    return ChainEnsemble(
        hit_tick=hit, snapshots=snapshots, observer_level=u, chains=chains
    )
