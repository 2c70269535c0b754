"""Hypergraph data model, structural profiling and combinatorial detectors.

Nodes are labelled ``1..q``.  Internally every hyperedge is also kept as an
integer bitmask (bit ``i - 1`` for node ``i``) so that the exhaustive searches
below stay cheap at the sizes we care about.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "HypergraphError",
    "EmptyEdge",
    "NodeOutOfRange",
    "NotCovering",
    "NotSimple",
    "NotConnected",
    "NotUniform",
    "BadParameters",
    "GuardExceeded",
    "TooLarge",
    "Hypergraph",
    "StructuralProfile",
    "PartitionWitness",
    "HallResult",
    "validate",
    "profile",
    "transversal_number",
    "minimal_transversals",
    "detect_partitions",
    "check_hall",
    "verify_cycle",
    "generate",
    "parse_family",
    "load_hypergraph",
    "dump_hypergraph",
    "FANO_EDGES",
]

TRANSVERSAL_GUARD = 24
PARTITION_GUARD = 20
HALL_GUARD = 14

FANO_EDGES = ((1, 2, 4), (1, 5, 6), (1, 3, 7), (2, 3, 5), (4, 5, 7), (4, 3, 6), (6, 2, 7))


class HypergraphError(ValueError):
    """Invalid hypergraph input."""


class EmptyEdge(HypergraphError):
    pass


class NodeOutOfRange(HypergraphError):
    pass


class NotCovering(HypergraphError):
    pass


class NotSimple(HypergraphError):
    pass


class NotConnected(HypergraphError):
    pass


class NotUniform(HypergraphError):
    pass


class BadParameters(HypergraphError):
    pass


class GuardExceeded(RuntimeError):
    """An exhaustive enumeration was asked to run beyond its size guard."""


class TooLarge(GuardExceeded):
    pass


def _mask(nodes: Iterable[int]) -> int:
    m = 0
    for i in nodes:
        m |= 1 << (i - 1)
    return m


def _nodes(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class Hypergraph:
    """A simple, connected hypergraph in canonical form.

    Build instances with :func:`validate` or :func:`generate`; the constructor
    does not re-check the invariants.

    ``cycle_hint`` optionally carries a node ordering and overlap ``l`` under
    which the hypergraph is known to be an l-cycle (set by the cycle
    generator).  It does not take part in equality or hashing.
    """

    q: int
    hyperedges: tuple[tuple[int, ...], ...]
    cycle_hint: Optional[tuple[tuple[int, ...], int]] = field(default=None, compare=False, repr=False)

    @property
    def nodes(self) -> range:
        return range(1, self.q + 1)

    @property
    def m(self) -> int:
        return len(self.hyperedges)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(_mask(h) for h in self.hyperedges)

    @property
    def rank(self) -> int:
        return max(len(h) for h in self.hyperedges)

    @property
    def anti_rank(self) -> int:
        return min(len(h) for h in self.hyperedges)

    @property
    def is_uniform(self) -> bool:
        return self.rank == self.anti_rank

    def degree(self, i: int) -> int:
        return sum(1 for h in self.hyperedges if i in h)

    def degrees(self) -> tuple[int, ...]:
        d = [0] * self.q
        for h in self.hyperedges:
            for i in h:
                d[i - 1] += 1
        return tuple(d)

    def edges_meeting(self, nodes: Iterable[int]) -> tuple[tuple[int, ...], ...]:
        """Hyperedges intersecting ``nodes`` (the set written H(A))."""
        s = set(nodes)
        return tuple(h for h in self.hyperedges if s.intersection(h))

    def incidence(self) -> np.ndarray:
        """``(m, q)`` 0/1 incidence matrix."""
        inc = np.zeros((self.m, self.q), dtype=np.int64)
        for e, h in enumerate(self.hyperedges):
            inc[e, [i - 1 for i in h]] = 1
        return inc

    def to_dict(self) -> dict:
        return {"q": self.q, "hyperedges": [list(h) for h in self.hyperedges]}

    def __str__(self) -> str:
        body = ", ".join("".join(map(str, h)) if self.q < 10 else "{" + ",".join(map(str, h)) + "}"
                         for h in self.hyperedges)
        return f"Hypergraph(q={self.q}: {body})"


@dataclass(frozen=True)
class StructuralProfile:
    rank: int
    anti_rank: int
    degrees: tuple[int, ...]
    uniform_r: Optional[int]
    regular_d: Optional[int]
    transversal_number: int
    connected: bool

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "anti_rank": self.anti_rank,
            "degrees": list(self.degrees),
            "uniform_r": self.uniform_r,
            "regular_d": self.regular_d,
            "transversal_number": self.transversal_number,
            "connected": self.connected,
        }


@dataclass(frozen=True)
class PartitionWitness:
    """Result of :func:`detect_partitions`.

    ``kind`` is ``"k_partite"``, ``"r_uniform_bipartite"`` or ``"none"``.
    A k-partite witness also carries the bipartite split it implies (any
    single part meets every hyperedge exactly once).
    """

    kind: str
    parts: tuple[tuple[int, ...], ...] = ()
    k: Optional[int] = None
    bipartite: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "parts": [list(p) for p in self.parts],
            "bipartite": None if self.bipartite is None else [list(p) for p in self.bipartite],
        }


@dataclass(frozen=True)
class HallResult:
    satisfied: bool
    v1: tuple[int, ...] = ()
    v2: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {"satisfied": self.satisfied, "V1": list(self.v1), "V2": list(self.v2)}


# --------------------------------------------------------------------------
# construction


def _connected(masks: Sequence[int]) -> bool:
    if not masks:
        return False
    seen = {0}
    frontier = [0]
    while frontier:
        e = frontier.pop()
        for f, mf in enumerate(masks):
            if f not in seen and mf & masks[e]:
                seen.add(f)
                frontier.append(f)
    return len(seen) == len(masks)


def validate(q: int, edges: Iterable[Iterable[int]], cycle_hint=None) -> Hypergraph:
    """Check a raw node count and edge list and return the canonical hypergraph.

    Raises one of :class:`EmptyEdge`, :class:`NodeOutOfRange`,
    :class:`NotCovering`, :class:`NotSimple` or :class:`NotConnected`.
    Duplicate hyperedges are merged silently.
    """
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise BadParameters(f"node count must be a positive integer, got {q!r}")
    q = int(q)
    canon = set()
    for raw in edges:
        h = tuple(sorted({int(i) for i in raw}))
        if not h:
            raise EmptyEdge("empty hyperedge")
        if len(h) < 2:
            raise EmptyEdge(f"hyperedge {list(h)} has fewer than 2 nodes")
        bad = [i for i in h if not 1 <= i <= q]
        if bad:
            raise NodeOutOfRange(f"hyperedge {list(h)} has nodes outside 1..{q}: {bad}")
        canon.add(h)
    if not canon:
        raise EmptyEdge("no hyperedges")
    hyperedges = tuple(sorted(canon))
    masks = [_mask(h) for h in hyperedges]
    union = 0
    for m in masks:
        union |= m
    missing = [i for i in range(1, q + 1) if not union >> (i - 1) & 1]
    if missing:
        raise NotCovering(f"nodes {missing} belong to no hyperedge")
    for a, b in itertools.permutations(range(len(masks)), 2):
        if masks[a] & masks[b] == masks[a]:
            raise NotSimple(f"hyperedge {list(hyperedges[a])} is included in {list(hyperedges[b])}")
    if not _connected(masks):
        raise NotConnected("representative graph is disconnected")
    return Hypergraph(q, hyperedges, cycle_hint)


# --------------------------------------------------------------------------
# transversals


def _hits_all(t: int, masks: Sequence[int]) -> bool:
    for m in masks:
        if not t & m:
            return False
    return True


def transversal_number(h: Hypergraph) -> int:
    """Smallest transversal size, by ascending-size exhaustive search."""
    if h.q > TRANSVERSAL_GUARD:
        raise TooLarge(f"q={h.q} exceeds transversal guard {TRANSVERSAL_GUARD}")
    masks = sorted(h.masks, key=lambda m: bin(m).count("1"))
    # nodes by decreasing degree: good transversals are found early
    order = sorted(h.nodes, key=lambda i: -h.degree(i))
    for k in range(1, h.q + 1):
        for combo in itertools.combinations(order, k):
            if _hits_all(_mask(combo), masks):
                return k
    raise AssertionError("V itself is a transversal")


def profile(h: Hypergraph) -> StructuralProfile:
    degrees = h.degrees()
    r, a = h.rank, h.anti_rank
    return StructuralProfile(
        rank=r,
        anti_rank=a,
        degrees=degrees,
        uniform_r=r if r == a else None,
        regular_d=degrees[0] if len(set(degrees)) == 1 else None,
        transversal_number=transversal_number(h),
        connected=_connected(h.masks),
    )


def _minimize(sets: Iterable[int]) -> list[int]:
    """Keep only inclusion-minimal bitmasks."""
    ordered = sorted(set(sets), key=lambda s: (bin(s).count("1"), s))
    kept: list[int] = []
    for s in ordered:
        if not any(k & s == k for k in kept):
            kept.append(s)
    return kept


def _inclusion_minimal_masks(masks: Sequence[int]) -> list[int]:
    # Berge's sequential dualisation: Tr(E1..Ek) = min{T | v : T in Tr(E1..Ek-1), v in Ek}
    current = [0]
    for e in masks:
        nxt = []
        for t in current:
            if t & e:
                nxt.append(t)
            else:
                m = e
                while m:
                    low = m & -m
                    nxt.append(t | low)
                    m ^= low
        current = _minimize(nxt)
    return current


def _canonical_sets(masks: Iterable[int]) -> list[tuple[int, ...]]:
    return sorted((_nodes(m) for m in masks), key=lambda s: (len(s), s))


def minimal_transversals(h: Hypergraph, mode: str = "minimum_cardinality") -> list[tuple[int, ...]]:
    """All transversals that are minimal in the requested sense.

    ``mode="minimum_cardinality"`` returns every transversal of size tau(H);
    ``mode="inclusion_minimal"`` returns every transversal with no proper
    transversal subset.  Output is sorted by (size, lexicographic).
    """
    if h.q > TRANSVERSAL_GUARD:
        raise TooLarge(f"q={h.q} exceeds transversal guard {TRANSVERSAL_GUARD}")
    if mode == "inclusion_minimal":
        return _canonical_sets(_inclusion_minimal_masks(h.masks))
    if mode == "minimum_cardinality":
        tau = transversal_number(h)
        masks = h.masks
        return [c for c in itertools.combinations(h.nodes, tau) if _hits_all(_mask(c), masks)]
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# partitions


def _rainbow_colouring(h: Hypergraph, k: int) -> Optional[list[int]]:
    """Colour nodes with k colours so that every hyperedge sees each colour once."""
    colour = [0] * (h.q + 1)  # 0 = uncoloured
    edges_of = {i: [e for e in h.hyperedges if i in e] for i in h.nodes}
    order = sorted(h.nodes, key=lambda i: -len(edges_of[i]))

    def ok(i: int, c: int) -> bool:
        for e in edges_of[i]:
            for j in e:
                if j != i and colour[j] == c:
                    return False
        return True

    def rec(pos: int, used: int) -> bool:
        if pos == len(order):
            return True
        i = order[pos]
        # symmetry breaking: a fresh colour is only ever the next unused one
        for c in range(1, min(used + 1, k) + 1):
            if ok(i, c):
                colour[i] = c
                if rec(pos + 1, max(used, c)):
                    return True
                colour[i] = 0
        return False

    return colour if rec(0, 0) else None


def _exact_hitting_set(h: Hypergraph) -> Optional[int]:
    """A node set meeting every hyperedge in exactly one node, smallest first."""
    masks = h.masks
    for k in range(1, h.q + 1):
        for combo in itertools.combinations(h.nodes, k):
            t = _mask(combo)
            if all(bin(t & m).count("1") == 1 for m in masks):
                return t
    return None


def detect_partitions(h: Hypergraph) -> PartitionWitness:
    """Search for a k-partite or an r-uniform bipartite structure.

    Every hyperedge of a k-partite hypergraph meets each of the k parts once,
    so the hypergraph is k-uniform and k = r is the only candidate.  When a
    k-partite partition exists it is returned together with the bipartite
    split it induces; otherwise the bipartite split is searched on its own.
    The searches are exhaustive, so ``kind == "none"`` proves absence.
    """
    if h.q > PARTITION_GUARD:
        raise TooLarge(f"q={h.q} exceeds partition guard {PARTITION_GUARD}")
    if not h.is_uniform:
        return PartitionWitness("none")
    r = h.rank
    colours = _rainbow_colouring(h, r)
    if colours is not None:
        parts = sorted(tuple(i for i in h.nodes if colours[i] == c) for c in range(1, r + 1))
        v1 = parts[0]
        v2 = tuple(i for i in h.nodes if i not in v1)
        return PartitionWitness("k_partite", tuple(parts), r, (v1, v2))
    t = _exact_hitting_set(h)
    if t is not None and t != _mask(h.nodes):
        v1 = _nodes(t)
        v2 = tuple(i for i in h.nodes if i not in v1)
        return PartitionWitness("r_uniform_bipartite", (v1, v2), None, (v1, v2))
    return PartitionWitness("none")


def check_hall(h: Hypergraph) -> HallResult:
    """Exhaustive test of Hall's condition over all disjoint pairs (V1, V2).

    On violation the returned pair maximises |V1| - |V2|, ties broken by the
    smallest bitmasks of V1 then V2.
    """
    q = h.q
    if q > HALL_GUARD:
        raise TooLarge(f"q={q} exceeds Hall guard {HALL_GUARD}")
    inc = h.incidence().astype(np.float32)
    total = 3 ** q
    powers = 3 ** np.arange(q, dtype=np.int64)
    chunk = 1 << 18
    best = None  # (deficit, v1mask, v2mask)
    bitw = 1 << np.arange(q, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % 3
        # digit 1 -> V2 (+1), digit 2 -> V1 (-1)
        x = np.where(digits == 1, 1, np.where(digits == 2, -1, 0)).astype(np.float32)
        size_diff = -x.sum(axis=1)  # |V1| - |V2|
        cand = size_diff > 0
        if not cand.any():
            continue
        xc = x[cand]
        ok = (xc @ inc.T >= 0).all(axis=1)
        if not ok.any():
            continue
        dc = size_diff[cand][ok]
        xv = xc[ok]
        v1m = ((xv < 0) * bitw).sum(axis=1)
        v2m = ((xv > 0) * bitw).sum(axis=1)
        order = np.lexsort((v2m, v1m, -dc))
        j = order[0]
        key = (-int(dc[j]), int(v1m[j]), int(v2m[j]))
        if best is None or key < best:
            best = key
    if best is None:
        return HallResult(True)
    return HallResult(False, _nodes(best[1]), _nodes(best[2]))


def verify_cycle(h: Hypergraph, ordering: Sequence[int], l: int) -> bool:
    """True iff ``h`` is an l-cycle under the node ``ordering``.

    Every hyperedge must be a window of r cyclically consecutive nodes and
    hyperedges that are consecutive along the cycle must share exactly ``l``
    nodes.
    """
    if not h.is_uniform:
        raise NotUniform("l-cycles are defined for uniform hypergraphs only")
    r, q = h.rank, h.q
    if not 0 < l < r:
        raise BadParameters(f"need 0 < l < r, got l={l}, r={r}")
    if sorted(ordering) != list(h.nodes):
        raise BadParameters("ordering must be a permutation of the nodes")
    pos = {v: p for p, v in enumerate(ordering)}
    starts = []
    for e in h.hyperedges:
        ps = sorted(pos[v] for v in e)
        found = None
        for s in ps:
            if all((s + t) % q in ps for t in range(r)):
                found = s
                break
        if found is None:
            return False
        starts.append((found, frozenset(e)))
    starts.sort(key=lambda t: t[0])
    if len(starts) < 2:
        return False
    for (_, a), (_, b) in zip(starts, starts[1:] + starts[:1]):
        if len(a & b) != l:
            return False
    return True


# --------------------------------------------------------------------------
# families


def _complete(q: int, r: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(1, q + 1), r))


def generate(family: str, **params) -> Hypergraph:
    """Build a hypergraph from a named family.

    Families: ``complete(q, r)``, ``complete_minus(q, r, J)``,
    ``cycle(q, r, l)``, ``fano()``, ``fano_minus(H)``, ``star(q, edges)``.
    A family string such as ``"cycle:q=12,r=3,l=2"`` is also accepted.
    """
    if ":" in family:
        family, parsed = parse_family(family)
        params = {**parsed, **params}
    name = family.replace("-", "_")
    if name in ("complete", "complete_r_uniform"):
        q, r = int(params["q"]), int(params.get("r", 3))
        if not 2 <= r <= q:
            raise BadParameters(f"need 2 <= r <= q, got q={q}, r={r}")
        return validate(q, _complete(q, r))
    if name == "complete_minus":
        q, r = int(params["q"]), int(params.get("r", 3))
        J = [tuple(sorted(int(i) for i in e)) for e in params.get("J", [])]
        seen: set[int] = set()
        for e in J:
            if len(e) != r or len(set(e)) != r or not all(1 <= i <= q for i in e):
                raise BadParameters(f"{list(e)} is not a hyperedge of the complete {r}-uniform hypergraph")
            if seen.intersection(e):
                raise BadParameters("removed hyperedges must be pairwise disjoint")
            seen.update(e)
        removed = set(J)
        return validate(q, [e for e in _complete(q, r) if e not in removed])
    if name == "cycle":
        q, r, l = int(params["q"]), int(params["r"]), int(params["l"])
        if not 0 < l < r or r > q or q % (r - l):
            raise BadParameters(f"cycle needs 0 < l < r <= q and (r - l) | q; got q={q}, r={r}, l={l}")
        step = r - l
        edges = [tuple(sorted(((s + t) % q) + 1 for t in range(r))) for s in range(0, q, step)]
        return validate(q, edges, cycle_hint=(tuple(range(1, q + 1)), l))
    if name == "fano":
        return validate(7, FANO_EDGES)
    if name == "fano_minus":
        H = tuple(sorted(int(i) for i in params.get("H", (4, 5, 7))))
        if H not in {tuple(sorted(e)) for e in FANO_EDGES}:
            raise BadParameters(f"{list(H)} is not a line of the Fano plane")
        return validate(7, [e for e in FANO_EDGES if tuple(sorted(e)) != H])
    if name == "star":
        q = int(params["q"])
        edges = params.get("E") or params.get("edges") or [(1, i) for i in range(2, q + 1)]
        edges = [tuple(e) for e in edges]
        if not all(1 in e for e in edges):
            raise BadParameters("every star hyperedge must contain node 1")
        return validate(q, edges)
    raise BadParameters(f"unknown family {family!r}")


_KEY = re.compile(r"([A-Za-z_]\w*)=")


def parse_family(text: str) -> tuple[str, dict]:
    """Split ``"name:k=v,..."`` into ``(name, params)``; values are JSON."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if not rest.strip():
        return name, {}
    try:
        params = json.loads("{" + _KEY.sub(r'"\1":', rest) + "}")
    except json.JSONDecodeError as exc:
        raise BadParameters(f"cannot parse family parameters {rest!r}: {exc}") from None
    return name, params


def load_hypergraph(path) -> Hypergraph:
    with open(path) as f:
        data = json.load(f)
    try:
        return validate(data["q"], data["hyperedges"])
    except KeyError as exc:
        raise HypergraphError(f"hypergraph file lacks key {exc}") from None


def dump_hypergraph(h: Hypergraph, path) -> None:
    with open(path, "w") as f:
        json.dump(h.to_dict(), f)
        f.write("\n")
