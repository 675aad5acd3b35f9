"""Honest-agent dynamics: belief synchronization, forwarding, routing graphs.

Honest nodes repeatedly set their believed distance to each target to
min(current, 1 + min over neighbours of the neighbour's announced value) and
forward traffic to any neighbour announcing the minimum.  Colluding nodes
announce fixed vectors that never change across rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import Graph
from .kernels import INF


class BroadcastError(ValueError):
    """A colluder broadcast violates the model: non-zero self distance or a
    claimed distance below 1 to another node ("black hole")."""

    def __init__(self, message: str, node: int, target: int):
        super().__init__(f"{message} (node {node}, target {target})")
        self.node = node
        self.target = target


class ConvergenceError(RuntimeError):
    """Synchronization failed to reach a fixpoint within n-1 rounds."""


def validate_broadcasts(n: int, colluders, broadcasts) -> dict[int, np.ndarray]:
    """Normalize and validate per-colluder broadcast vectors.

    `broadcasts` maps each colluder to a length-n integer vector.  Requires
    exactly the colluder set as keys, a 0 self entry, and every other entry
    at least 1 (INF allowed).
    """
    colluders = frozenset(int(v) for v in colluders)
    if set(broadcasts) != colluders:
        missing = colluders - set(broadcasts)
        extra = set(broadcasts) - colluders
        raise ValueError(
            f"broadcast keys must equal the colluder set "
            f"(missing {sorted(missing)}, extra {sorted(extra)})"
        )
    out = {}
    for v, vec in broadcasts.items():
        vec = np.asarray(vec, np.int64)
        if vec.shape != (n,):
            raise ValueError(f"broadcast vector for node {v} has shape {vec.shape}")
        if vec[v] != 0:
            raise BroadcastError("self distance must be 0", v, v)
        bad = np.flatnonzero(vec < 1)
        bad = bad[bad != v]
        if bad.size:
            t = int(bad[0])
            raise BroadcastError("broadcast distance must be >= 1", v, t)
        out[int(v)] = vec
    return out


@dataclass(frozen=True)
class BeliefState:
    """Perceived-distance fixpoint: rho[i, j] is i's belief about d(i, j).

    Colluder rows equal their declared broadcasts verbatim; honest rows are
    the stabilized synchronization values.
    """

    rho: np.ndarray
    rounds_to_converge: int
    colluders: frozenset[int] = field(default_factory=frozenset)


def synchronize_column(g: Graph, colluders, broadcasts, t: int):
    """Fixpoint column of perceived distances to a single target t.

    Returns (col, rounds).  `broadcasts` must already be validated.
    """
    pinned = np.zeros(g.n, np.int64)
    pmask = np.zeros(g.n, np.bool_)
    for v in colluders:
        pmask[v] = True
        pinned[v] = broadcasts[v][t]
    return kernels.sync_column(g.indptr, g.indices, pinned, pmask, t)


def synchronize(g: Graph, colluders, broadcasts) -> BeliefState:
    """Run synchronization to the fixpoint with colluder rows pinned.

    Raises BroadcastError for malformed broadcasts and ConvergenceError if
    any target column needs more than n-1 rounds (a sub-1 broadcast leak).
    """
    broadcasts = validate_broadcasts(g.n, colluders, broadcasts)
    colluders = frozenset(broadcasts)
    rho = np.empty((g.n, g.n), np.int64)
    worst = 0
    for t in range(g.n):
        col, rounds = synchronize_column(g, colluders, broadcasts, t)
        if rounds > max(g.n - 1, 0):
            raise ConvergenceError(
                f"column {t} did not stabilize within {g.n - 1} rounds"
            )
        worst = max(worst, rounds)
        rho[:, t] = col
    return BeliefState(rho=rho, rounds_to_converge=worst, colluders=colluders)


@dataclass(frozen=True)
class ForwardingPolicy:
    """Greedy next-hop choices induced by a belief fixpoint.

    Honest nodes keep the full argmin set of neighbours; colluder hops are
    declared by the strategy layer, not derived here.
    """

    graph: Graph
    belief: BeliefState

    def next_hops(self, i: int, t: int) -> tuple[int, ...]:
        """Neighbours of honest node i announcing the minimal distance to t."""
        if i in self.belief.colluders:
            raise ValueError(f"node {i} is a colluder; its hop is strategy-declared")
        nbrs = self.graph.neighbors(i)
        vals = self.belief.rho[nbrs, t]
        best = vals.min() if vals.size else INF
        if best >= INF:
            return ()
        return tuple(int(v) for v in nbrs[vals == best])


def forwarding_policy(g: Graph, b: BeliefState) -> ForwardingPolicy:
    return ForwardingPolicy(graph=g, belief=b)


@dataclass(frozen=True)
class RoutingGraph:
    """Directed graph of admissible next hops toward one target.

    Walks from s to `target` are exactly the corresponding paths from s to
    the target: honest nodes fan out to every announced-minimum neighbour,
    colluders to their single declared hop.
    """

    target: int
    out_edges: dict[int, tuple[int, ...]]

    def reachable_to_target(self, banned=()) -> set[int]:
        """Nodes with a walk to the target avoiding `banned` internally."""
        banned = set(banned) - {self.target}
        radj: dict[int, list[int]] = {}
        for u, hops in self.out_edges.items():
            if u in banned:
                continue
            for v in hops:
                if v not in banned or v == self.target:
                    radj.setdefault(v, []).append(u)
        reached = {self.target}
        stack = [self.target]
        while stack:
            v = stack.pop()
            for u in radj.get(v, ()):
                if u not in reached:
                    reached.add(u)
                    stack.append(u)
        return reached


def routing_graph(g: Graph, fp: ForwardingPolicy, colluder_hops, t: int) -> RoutingGraph:
    """Materialize the per-target routing graph.

    `colluder_hops` maps each colluder to its declared next hop for t.
    """
    colluders = fp.belief.colluders
    if set(colluder_hops) != set(colluders):
        raise ValueError("colluder hops must be given for exactly the colluder set")
    out: dict[int, tuple[int, ...]] = {}
    for u in range(g.n):
        if u == t:
            continue
        if u in colluders:
            h = int(colluder_hops[u])
            if h >= 0 and not g.has_edge(u, h):
                raise ValueError(f"declared hop {h} is not a neighbour of colluder {u}")
            out[u] = (h,) if h >= 0 else ()
        else:
            out[u] = fp.next_hops(u, t)
    return RoutingGraph(target=t, out_edges=out)
