"""Recursive McCormick relaxations: construction, classification and projection."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

from multiflower.core import Hypergraph, InstanceError, VarRef, canon
from multiflower.cuts import GuardError, LinearInequality, dedupe

Split = tuple[VarRef, VarRef]

MAX_FLOWER_RANK = 8


class RMCError(InstanceError):
    """Invalid or incomplete partition map."""


def normalize_split(L: VarRef, J, K) -> Split:
    J, K = canon(J), canon(K)
    if not J or not K or set(J) & set(K) or canon(J + K) != L:
        raise RMCError(f"{list(J)} | {list(K)} is not a partition of {list(L)}")
    return (J, K) if J < K else (K, J)


def leftmost_split(L: VarRef) -> Split:
    return (L[:1], L[1:])


def balanced_split(L: VarRef) -> Split:
    half = (len(L) + 1) // 2
    return (L[:half], L[half:])


def all_splits(L: VarRef) -> list[Split]:
    """Every unordered two-block partition of L; the first block holds min(L)."""
    rest = L[1:]
    out = []
    for k in range(len(rest)):
        for extra in itertools.combinations(rest, k):
            J = (L[0],) + extra
            K = tuple(v for v in L if v not in J)
            out.append((J, K))
    return out


STRATEGIES: dict[str, Callable[[VarRef], Split]] = {"leftmost": leftmost_split, "balanced": balanced_split}


@dataclass(frozen=True)
class RecursiveMcCormick:
    base: Hypergraph
    partition: dict[VarRef, Split]
    sequences: dict[VarRef, tuple[VarRef, ...]]
    artificial: tuple[VarRef, ...]

    @property
    def size(self) -> int:
        return len(self.artificial)

    def variables(self) -> list[VarRef]:
        return self.base.variables() + list(self.artificial)

    def witnesses(self, e: VarRef, p: VarRef) -> list[VarRef]:
        """Other edges whose recursive sequence contains p."""
        return [f for f in self.base.edges if f != e and p in self.sequences[f]]


def build_rmc(h: Hypergraph, strategy="leftmost") -> RecursiveMcCormick:
    """Decompose every edge into bilinear products.

    ``strategy`` is ``"leftmost"``, ``"balanced"`` or an explicit mapping from
    vertex sets to two-block partitions (two-element sets may be omitted,
    their split is forced). A set is partitioned once and that
    partition is reused wherever the set recurs; only the edge itself and
    artificial sets are expanded inside an edge's sequence.
    """
    if isinstance(strategy, str):
        try:
            choose = STRATEGIES[strategy]
        except KeyError:
            raise RMCError(f"unknown strategy {strategy!r}") from None
    else:
        explicit = {canon(L): normalize_split(canon(L), *jk) for L, jk in strategy.items()}

        def choose(L):
            if len(L) == 2 and L not in explicit:
                return leftmost_split(L)
            try:
                return explicit[L]
            except KeyError:
                raise RMCError(f"partition map has no entry for {list(L)}") from None

    edges = h.edge_set
    partition: dict[VarRef, Split] = {}
    artificial: set[VarRef] = set()
    sequences = {}
    for I in h.edges:
        seq = [I]
        i = 0
        while i < len(seq):
            L = seq[i]
            i += 1
            if L != I and L not in artificial:
                continue
            if L not in partition:
                partition[L] = normalize_split(L, *choose(L))
            for part in partition[L]:
                if len(part) < 2:
                    continue
                if part not in seq:
                    seq.append(part)
                if part not in edges:
                    artificial.add(part)
        sequences[I] = tuple(seq)
    return RecursiveMcCormick(h, partition, sequences, tuple(sorted(artificial)))


def rmc_constraints(r: RecursiveMcCormick, box: bool = False) -> list[LinearInequality]:
    """Bilinear envelopes of every partition; with ``box`` also 0 <= z_v <= 1."""
    out = []
    if box:
        for v in r.base.vertices:
            out.append(LinearInequality({(v,): 1.0}, 1.0, "rmc"))
            out.append(LinearInequality({(v,): -1.0}, 0.0, "rmc"))
    for L, (J, K) in r.partition.items():
        meta = {"set": L, "split": [J, K]}
        out.append(LinearInequality({L: -1.0}, 0.0, "rmc", meta))
        out.append(LinearInequality({J: 1.0, K: 1.0, L: -1.0}, 1.0, "rmc", meta))
        out.append(LinearInequality({L: 1.0, J: -1.0}, 0.0, "rmc", meta))
        out.append(LinearInequality({L: 1.0, K: -1.0}, 0.0, "rmc", meta))
    return out


def is_non_overlapping(r: RecursiveMcCormick) -> bool:
    seqs = [set(s) for s in r.sequences.values()]
    return all(not (a & b) for a, b in itertools.combinations(seqs, 2))


def edge_level(r: RecursiveMcCormick, ebar) -> int:
    ebar = canon(ebar)
    if ebar not in r.artificial:
        raise RMCError(f"{list(ebar)} is not an artificial edge")
    art = set(r.artificial)
    inside = set(ebar)
    return max(
        sum(1 for p in seq if p in art and inside.issuperset(p))
        for seq in r.sequences.values()
        if ebar in seq
    )


def rmc_level(r: RecursiveMcCormick) -> int:
    return max((edge_level(r, a) for a in r.artificial), default=0)


@dataclass(frozen=True)
class FlowerPartition:
    edge: VarRef
    parts: tuple[VarRef, ...]
    artificial_parts: tuple[VarRef, ...]
    witnesses: tuple[tuple[VarRef, VarRef], ...]  # (artificial part, witnessing edge)


def enumerate_flower_partitions(r: RecursiveMcCormick, e) -> list[FlowerPartition]:
    e = canon(e)
    if e not in r.base.edge_set:
        raise RMCError(f"{list(e)} is not an edge")
    if r.base.rank > MAX_FLOWER_RANK:
        raise GuardError(f"flower partition enumeration refused for rank {r.base.rank} > {MAX_FLOWER_RANK}")
    art = set(r.artificial)
    wit = {}
    blocks = [(v,) for v in e]
    for p in r.sequences[e]:
        if p == e:
            continue
        if p in art:
            w = r.witnesses(e, p)
            if not w:
                continue
            wit[p] = w
        blocks.append(p)
    blocks.sort()

    covers = []

    def grow(remaining: frozenset, chosen: list):
        if not remaining:
            covers.append(tuple(sorted(chosen)))
            return
        v = min(remaining)
        for b in blocks:
            if v in b and remaining.issuperset(b):
                chosen.append(b)
                grow(remaining - set(b), chosen)
                chosen.pop()

    grow(frozenset(e), [])
    out = []
    for parts in sorted(set(covers)):
        arts = tuple(p for p in parts if p in wit)
        for choice in itertools.product(*(wit[p] for p in arts)):
            out.append(FlowerPartition(e, parts, arts, tuple(zip(arts, choice))))
    return out


def rmc_projection_system(r: RecursiveMcCormick) -> list[LinearInequality]:
    """Description of the RMC projected onto vertex and edge variables."""
    h = r.base
    edges = h.edge_set
    out = [LinearInequality({(v,): 1.0}, 1.0, "projection", {"kind": "proj0"}) for v in h.vertices]
    out += [LinearInequality({e: -1.0}, 0.0, "projection", {"kind": "proj0"}) for e in h.edges]
    for e in h.edges:
        uppers = [(v,) for v in e] + [p for p in r.sequences[e] if p in edges and p != e]
        out += [LinearInequality({e: 1.0, p: -1.0}, 0.0, "projection", {"kind": "proj1"}) for p in uppers]
    for e in h.edges:
        for fp in enumerate_flower_partitions(r, e):
            w = dict(fp.witnesses)
            coeffs: dict[VarRef, float] = {}
            for p in fp.parts:
                q = w.get(p, p)
                coeffs[q] = coeffs.get(q, 0.0) + 1.0
            coeffs[e] = coeffs.get(e, 0.0) - 1.0
            meta = {"kind": "proj2", "edge": e, "partition": list(fp.parts), "witnesses": [list(x) for x in fp.witnesses]}
            out.append(LinearInequality(coeffs, len(fp.parts) - 1, "projection", meta))
    return dedupe(out)


def _search_maps(h: Hypergraph, on_leaf, prune=None, budget: int | None = None):
    """Depth-first over global partition maps reachable from the edges.

    ``on_leaf(map, artificial)`` is called for each complete map.  Returns
    False when the node budget ran out.
    """
    edges = h.edge_set
    nodes = 0
    visited = set()

    def rec(todo: tuple, partition: dict, artificial: frozenset) -> bool:
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            return False
        if prune is not None:
            state = (todo, artificial)
            if state in visited or prune(artificial):
                return True
            visited.add(state)
        if not todo:
            on_leaf(partition, artificial)
            return True
        L, rest = todo[0], todo[1:]
        for J, K in all_splits(L):
            new = [p for p in (J, K) if len(p) > 1 and p not in edges and p not in artificial]
            partition[L] = (J, K)
            ok = rec(tuple(sorted(set(rest) | set(new))), partition, artificial | set(new))
            del partition[L]
            if not ok:
                return False
        return True

    return rec(tuple(h.edges), {}, frozenset())


def enumerate_rmcs(h: Hypergraph, limit: int = 200_000) -> list[RecursiveMcCormick]:
    """Every recursive McCormick relaxation of ``h`` (one per global partition map)."""
    maps = []

    def leaf(partition, _artificial):
        if len(maps) >= limit:
            raise GuardError(f"more than {limit} recursive McCormick relaxations")
        maps.append(dict(partition))

    _search_maps(h, leaf)
    return [build_rmc(h, m) for m in maps]


def count_rmcs(h: Hypergraph) -> int:
    count = 0

    def leaf(_p, _a):
        nonlocal count
        count += 1

    _search_maps(h, leaf)
    return count


def min_size_rmc(h: Hypergraph, budget: int = 10**6) -> tuple[RecursiveMcCormick, bool]:
    """Smallest-size RMC by exhaustive search; the flag is False if the budget ran out first.

    Ties are broken by the lexicographically smallest sorted artificial set.
    """
    best: dict = {}

    def key(artificial):
        return (len(artificial), tuple(sorted(artificial)))

    def leaf(partition, artificial):
        if not best or key(artificial) < best["key"]:
            best["key"] = key(artificial)
            best["map"] = dict(partition)

    def prune(artificial):
        return bool(best) and len(artificial) > best["key"][0]

    complete = _search_maps(h, leaf, prune, budget)
    if not best:
        raise GuardError("budget exhausted before any RMC was found")
    return build_rmc(h, best["map"]), complete


def overlap_witness(r: RecursiveMcCormick):
    """A point of the standard linearization cut off by an overlapping RMC.

    Returns ``(point, case, (e1, e2, shared), violated)`` where ``violated``
    is an inequality the RMC implies but the point violates, or None for a
    non-overlapping RMC.  Case "i" is an edge inside another edge's sequence;
    case "ii" an artificial set shared by two sequences.
    """
    h = r.base
    edges = h.edge_set
    for e1 in h.edges:
        for p in r.sequences[e1]:
            if p != e1 and p in edges:
                point = {ref: 0.5 for ref in h.variables()}
                point[p] = 0.0
                return point, "i", (e1, p, p), LinearInequality({e1: 1.0, p: -1.0}, 0.0, "rmc")
    for e1, e2 in itertools.combinations(h.edges, 2):
        shared = sorted(set(r.sequences[e1]) & set(r.sequences[e2]))
        if not shared:
            continue
        s = shared[0]
        ones = set(e2) - set(s)
        halves = (set(e1) - set(e2)) | set(s)
        point = {}
        for v in h.vertices:
            point[(v,)] = 1.0 if v in ones else 0.5 if v in halves else 0.0
        span = set(e1) | set(e2)
        for e in h.edges:
            if ones.issuperset(e):
                point[e] = 1.0
            elif not span.issuperset(e):
                point[e] = 0.0
            else:
                point[e] = 0.5
        point[e1], point[e2] = 0.5, 0.0
        coeffs = {(v,): 1.0 for v in ones}
        coeffs[e1] = 1.0
        coeffs[e2] = -1.0
        return point, "ii", (e1, e2, s), LinearInequality(coeffs, len(ones), "rmc")
    return None


def parse_rmc_file(text: str) -> dict[VarRef, Split]:
    try:
        data = json.loads(text)
        entries = data["partitions"]
        out = {}
        for item in entries:
            L = canon(item["set"])
            if L in out:
                raise RMCError(f"duplicate partition for {list(L)}")
            out[L] = normalize_split(L, item["left"], item["right"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RMCError):
            raise
        raise RMCError(f"malformed RMC file: {exc}") from exc
    return out


def render_rmc_file(r: RecursiveMcCormick) -> str:
    items = [{"set": list(L), "left": list(J), "right": list(K)} for L, (J, K) in r.partition.items()]
    return json.dumps({"partitions": items}, indent=1) + "\n"
