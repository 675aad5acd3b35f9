"""Per-neighbour (nonuniform) broadcasts reduced to the uniform model.

Every edge incident to a colluder is subdivided once; the subdivision vertex
joins the colluder set and uniformly announces what its owning colluder would
have announced across that edge.  Honest perception is unchanged for original
targets, so which original pairs get intercepted is preserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .graph import Graph, from_edges
from .kernels import INF
from .strategy import Strategy, _closest_hop, _DistCache


@dataclass(frozen=True)
class NonuniformStrategy:
    """Colluders announce a possibly different vector to each neighbour.

    broadcast[v][u] is the length-n vector v announces to neighbour u;
    forward[v] is v's per-target hop (-1 undefined).
    """

    colluders: tuple[int, ...]
    broadcast: dict[int, dict[int, np.ndarray]]
    forward: dict[int, np.ndarray]


def honest_nonuniform(g: Graph, S) -> NonuniformStrategy:
    S = tuple(sorted(set(int(v) for v in S)))
    cache = _DistCache(g)
    broadcast = {}
    forward = {v: np.full(g.n, -1, np.int64) for v in S}
    for v in S:
        row = cache.row(v)
        broadcast[v] = {int(u): row.copy() for u in g.neighbors(v)}
    for t in range(g.n):
        dist_t = cache.row(t)
        for v in S:
            if v != t:
                forward[v][t] = _closest_hop(g, dist_t, v)
    return NonuniformStrategy(colluders=S, broadcast=broadcast, forward=forward)


@dataclass(frozen=True)
class BlowupMap:
    """Subdivision of every edge incident to the colluder set.

    w_of maps each subdivided edge (u, v) with u < v to its new vertex id;
    edge_of is the inverse.  New ids are n, n+1, ... in sorted edge order.
    """

    original: Graph
    blown: Graph
    S: tuple[int, ...]
    w_of: dict[tuple[int, int], int]
    edge_of: dict[int, tuple[int, int]]

    @property
    def S_prime(self) -> tuple[int, ...]:
        return tuple(sorted((*self.S, *self.edge_of)))


def blow_up(g: Graph, S) -> BlowupMap:
    S = tuple(sorted(set(int(v) for v in S)))
    sset = set(S)
    w_of: dict[tuple[int, int], int] = {}
    edges = []
    nxt = g.n
    for u, v in sorted(g.edges()):
        if u in sset or v in sset:
            w_of[(u, v)] = nxt
            edges.append((u, nxt))
            edges.append((nxt, v))
            nxt += 1
        else:
            edges.append((u, v))
    blown = from_edges(nxt, edges)
    edge_of = {w: e for e, w in w_of.items()}
    return BlowupMap(original=g, blown=blown, S=S, w_of=w_of, edge_of=edge_of)


def _owner_side(bm: BlowupMap, u: int, v: int):
    """For subdivided edge {u, v}, the colluder whose announcement the new
    vertex carries (lowest id when both endpoints collude) and the hearer."""
    sset = set(bm.S)
    if u in sset:
        return u, v
    return v, u


def lift_strategy(bm: BlowupMap, nonuniform: NonuniformStrategy) -> Strategy:
    """Uniform strategy on the blown-up graph simulating a nonuniform one.

    Each subdivision vertex w of edge (u, v) with colluder u announces u's
    per-neighbour vector for v on honest original targets and relays toward v
    exactly when u's declared hop crosses that edge.  Original colluders
    announce true distances (only the subdivision vertices hear them) and
    forward through the subdivision vertex of their declared hop.

    Columns whose target is itself a colluder or a subdivision vertex stay
    fully honest: those pairs are intercepted by definition, and keeping the
    lie there can break ties (subdividing the target's edges shifts honest
    perceived distances by one hop relative to the carried-over lie).
    """
    if tuple(nonuniform.colluders) != bm.S:
        raise ValueError("nonuniform strategy colluders do not match the blowup")
    gp = bm.blown
    n, np_ = bm.original.n, gp.n
    cache = _DistCache(gp)
    sset = set(bm.S)
    broadcast: dict[int, np.ndarray] = {}
    forward: dict[int, np.ndarray] = {}

    for v in bm.S:
        broadcast[v] = cache.row(v).copy()
        forward[v] = np.full(np_, -1, np.int64)

    for (u, v), w in bm.w_of.items():
        owner, hearer = _owner_side(bm, u, v)
        vec = cache.row(w).copy()
        src = nonuniform.broadcast[owner][hearer]
        for t in range(n):
            if t not in sset:
                vec[t] = src[t]
        vec[w] = 0
        broadcast[w] = vec
        forward[w] = np.full(np_, -1, np.int64)

    dist_rows: dict[int, np.ndarray] = {}

    def drow(t):
        if t not in dist_rows:
            dist_rows[t] = cache.row(t)
        return dist_rows[t]

    for t in range(np_):
        honest_target = t >= n or t in sset
        for v in bm.S:
            if v == t:
                continue
            if not honest_target and nonuniform.forward[v][t] >= 0:
                hop = int(nonuniform.forward[v][t])
                e = (min(v, hop), max(v, hop))
                forward[v][t] = bm.w_of[e]
            else:
                forward[v][t] = _closest_hop(gp, drow(t), v)
        for (u, v), w in bm.w_of.items():
            if w == t:
                continue
            if t == u or t == v:
                forward[w][t] = t
                continue
            hop = -1
            if not honest_target:
                if u in sset and nonuniform.forward[u][t] == v:
                    hop = v
                elif v in sset and nonuniform.forward[v][t] == u:
                    hop = u
                elif not (u in sset and v in sset):
                    # the honest endpoint may be drawn in by the lie; relay
                    # its traffic onward to the colluder, never back
                    hop = u if u in sset else v
            if hop < 0:
                hop = _closest_hop(gp, drow(t), w)
            forward[w][t] = hop
    return Strategy(colluders=bm.S_prime, broadcast=broadcast, forward=forward,
                    label="lifted")


def collapse_strategy(bm: BlowupMap, uniform: Strategy) -> NonuniformStrategy:
    """Contract the subdivision vertices back into per-neighbour broadcasts.

    A colluder's announcement to neighbour v is the uniform broadcast of the
    subdivision vertex on edge (u, v), restricted to original targets with
    the self entry restored to 0; forwarding hops map back through the
    contracted edge.  An edge between two colluders has one subdivision
    vertex serving both directions (announcements between colluders are
    never consulted), so both per-neighbour vectors come from it.
    """
    if tuple(uniform.colluders) != bm.S_prime:
        raise ValueError("uniform strategy colluders do not match the blowup")
    n = bm.original.n
    broadcast: dict[int, dict[int, np.ndarray]] = {v: {} for v in bm.S}
    forward: dict[int, np.ndarray] = {}
    sset = set(bm.S)
    for (u, v), w in bm.w_of.items():
        owner, hearer = _owner_side(bm, u, v)
        vec = uniform.broadcast[w][:n].copy()
        vec[owner] = 0
        broadcast[owner][hearer] = vec
        if hearer in sset:
            rev = uniform.broadcast[w][:n].copy()
            rev[hearer] = 0
            broadcast[hearer][owner] = rev
    for v in bm.S:
        hops = np.full(n, -1, np.int64)
        for t in range(n):
            h = int(uniform.forward[v][t])
            if h >= 0:
                e = bm.edge_of.get(h)
                if e is None:
                    hops[t] = h
                else:
                    hops[t] = e[0] if e[1] == v else e[1]
        forward[v] = hops
    return NonuniformStrategy(colluders=bm.S, broadcast=broadcast,
                              forward=forward)


def translate_fraction(g: Graph, S, p, mode: str = "direct_count") -> Fraction:
    """Interception fraction carried across the blowup.

    direct_count: every unordered pair touching a new vertex is intercepted
    (new vertices all collude), so with q subdivided edges
    p' = (p*C(n,2) + C(q,2) + q*n) / C(n+q,2).
    closed_form: an alternative expression for D-regular graphs with |S|*D
    new vertices and an |S|*|V| cross term; retained for comparison only,
    as it is known to disagree with direct counting.
    """
    S = sorted(set(int(v) for v in S))
    p = Fraction(p)
    n = g.n
    if not S:
        return p
    if mode == "direct_count":
        q = sum(1 for u, v in g.edges() if u in set(S) or v in set(S))
        num = p * comb(n, 2) + comb(q, 2) + q * n
        return num / Fraction(comb(n + q, 2))
    if mode == "closed_form":
        deg = g.degrees()
        if n and (deg != deg[0]).any():
            raise ValueError("closed_form mode requires a regular graph")
        D = int(deg[0]) if n else 0
        sd = len(S) * D
        num = p * comb(n, 2) + comb(sd, 2) + len(S) * n
        return num / Fraction(comb(n + sd, 2))
    raise ValueError(f"unknown mode {mode!r}")
