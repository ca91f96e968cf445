"""Standard linearization, flower and extended flower inequalities, and their separation."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from multiflower.core import Hypergraph, InstanceError, VarRef, adjacent_edges, canon, var_name

DEFAULT_TOL = 1e-7
MAX_CANDIDATES = 100_000


class CutError(ValueError):
    """Neighbor set rejected by a flower condition; ``code`` names the condition."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class GuardError(RuntimeError):
    """An exhaustive routine was asked to do more work than its guard allows."""


def _var_order(item):
    ref = item[0]
    return len(ref) > 1, ref


@dataclass
class LinearInequality:
    """sum coeffs[v] * z_v <= rhs."""

    coeffs: dict[VarRef, float]
    rhs: float
    tag: str = "std"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        merged: dict[VarRef, float] = {}
        for ref, c in self.coeffs.items():
            ref = canon(ref)
            merged[ref] = merged.get(ref, 0.0) + float(c)
        self.coeffs = {r: c for r, c in sorted(merged.items(), key=_var_order) if c != 0.0}
        self.rhs = float(self.rhs)

    def key(self) -> tuple:
        """Canonical form used for de-duplication; ignores tag and meta."""
        return tuple((r, round(c, 12)) for r, c in self.coeffs.items()), round(self.rhs, 12)

    def lhs(self, point: Mapping[VarRef, float]) -> float:
        return math.fsum(c * point[r] for r, c in self.coeffs.items())

    def violation(self, point: Mapping[VarRef, float]) -> float:
        return self.lhs(point) - self.rhs

    def variables(self) -> list[VarRef]:
        return list(self.coeffs)

    def to_json(self) -> dict:
        return {
            "tag": self.tag,
            "coefficients": [{"vars": list(r), "coef": c} for r, c in self.coeffs.items()],
            "rhs": self.rhs,
            **{k: _jsonable(v) for k, v in self.meta.items()},
        }

    def __str__(self):
        parts = []
        for r, c in self.coeffs.items():
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c):g} "
            parts.append(f"{sign} {mag}{var_name(r)}")
        text = " ".join(parts).lstrip("+ ") if parts else "0"
        return f"{text} <= {self.rhs:g}"


def _jsonable(v):
    if isinstance(v, tuple) and all(isinstance(x, int) for x in v):
        return list(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def dedupe(ineqs: Iterable[LinearInequality]) -> list[LinearInequality]:
    seen = set()
    out = []
    for ineq in ineqs:
        k = ineq.key()
        if k not in seen:
            seen.add(k)
            out.append(ineq)
    return out


def standard_linearization(h: Hypergraph) -> list[LinearInequality]:
    out = [LinearInequality({(v,): 1.0}, 1.0) for v in h.vertices]
    for e in h.edges:
        out.append(LinearInequality({e: -1.0}, 0.0))
        out.append(LinearInequality({**{(v,): 1.0 for v in e}, e: -1.0}, len(e) - 1))
        out.extend(LinearInequality({e: 1.0, (v,): -1.0}, 0.0) for v in e)
    return out


def flower_template(e0: VarRef, neighbors: Iterable[VarRef], tag: str = "eflower") -> LinearInequality:
    """The common inequality shape of flowers and extended flowers, for any neighbor set."""
    neighbors = sorted(canon(e) for e in neighbors)
    covered = set().union(*neighbors) if neighbors else set()
    petals_free = [v for v in e0 if v not in covered]
    coeffs: dict[VarRef, float] = {(v,): 1.0 for v in petals_free}
    for e in neighbors:
        coeffs[e] = coeffs.get(e, 0.0) + 1.0
    coeffs[e0] = coeffs.get(e0, 0.0) - 1.0
    meta = {"center": e0, "neighbors": neighbors}
    return LinearInequality(coeffs, len(petals_free) + len(neighbors) - 1, tag, meta)


def gammas(e0: VarRef, neighbors: list[VarRef]) -> list[int]:
    """Private intersection sizes: vertices of e0 met by e_i and by no other neighbor."""
    inter = [set(e0).intersection(e) for e in neighbors]
    out = []
    for i, own in enumerate(inter):
        others = set().union(*(s for j, s in enumerate(inter) if j != i))
        out.append(len(own - others))
    return out


def _check_neighbors(h: Hypergraph, e0, neighbors) -> tuple[VarRef, list[VarRef]]:
    e0 = canon(e0)
    neighbors = sorted(canon(e) for e in neighbors)
    if not neighbors:
        raise CutError("empty", "neighbor set must be nonempty")
    if len(set(neighbors)) != len(neighbors):
        raise CutError("duplicate", "neighbor set has repeated edges")
    adj = set(adjacent_edges(h, e0))
    for e in neighbors:
        if e not in adj:
            raise CutError("not-adjacent", f"{e} is not an edge adjacent to {e0}")
    return e0, neighbors


def flower_inequality(h: Hypergraph, e0, neighbors) -> LinearInequality:
    e0, neighbors = _check_neighbors(h, e0, neighbors)
    for e in neighbors:
        if len(set(e0).intersection(e)) < 2:
            raise CutError("cond5", f"neighbor {e} meets {e0} in fewer than two vertices")
    for a, b in itertools.combinations(neighbors, 2):
        common = set(e0) & set(a) & set(b)
        if common:
            raise CutError("cond6", f"neighbors {a} and {b} share {sorted(common)} inside {e0}")
    return flower_template(e0, neighbors, tag="flower")


def extended_flower_inequality(h: Hypergraph, e0, neighbors) -> LinearInequality:
    e0, neighbors = _check_neighbors(h, e0, neighbors)
    for e, g in zip(neighbors, gammas(e0, neighbors)):
        if g < 2:
            raise CutError("cond8", f"neighbor {e} has gamma={g} < 2")
    return flower_template(e0, neighbors, tag="eflower")


def reduce_neighbors(h: Hypergraph, e0, neighbors) -> tuple[list[VarRef], list[LinearInequality]]:
    """Drop neighbors with gamma 0 or 1, smallest first, recording the side inequalities."""
    e0, kept = _check_neighbors(h, e0, neighbors)
    side = []
    while kept:
        gs = gammas(e0, kept)
        bad = [i for i, g in enumerate(gs) if g < 2]
        if not bad:
            break
        i = bad[0]
        e = kept.pop(i)
        if gs[i] == 0:
            side.append(LinearInequality({e: 1.0}, 1.0, "std", {"dropped": e}))
        else:
            others = set().union(*(set(f) for f in kept)) if kept else set()
            (vbar,) = set(e0).intersection(e) - others
            side.append(LinearInequality({e: 1.0, (vbar,): -1.0}, 0.0, "std", {"dropped": e}))
    return kept, side


def _subsets(items: list, max_size: int):
    for k in range(1, max_size + 1):
        yield from itertools.combinations(items, k)


def _pairwise_disjoint_within(e0: VarRef, items: list[VarRef], max_size: int):
    """Subsets of ``items`` whose intersections with e0 are pairwise disjoint."""
    s0 = set(e0)
    inter = [s0.intersection(e) for e in items]

    def grow(start, used, chosen):
        if chosen:
            yield list(chosen)
        if len(chosen) == max_size:
            return
        for i in range(start, len(items)):
            if not (inter[i] & used):
                chosen.append(items[i])
                yield from grow(i + 1, used | inter[i], chosen)
                chosen.pop()

    yield from grow(0, set(), [])


def enumerate_flower(h: Hypergraph, cap: int = MAX_CANDIDATES) -> list[LinearInequality]:
    out = []
    for e0 in h.edges:
        cand = [e for e in adjacent_edges(h, e0) if len(set(e0).intersection(e)) >= 2]
        count = 0
        for T in _pairwise_disjoint_within(e0, cand, len(e0) // 2):
            count += 1
            if count > cap:
                raise GuardError(f"more than {cap} flower neighbor sets at {e0}")
            out.append(flower_template(e0, T, tag="flower"))
    return dedupe(out)


def _count_subsets(m: int, k: int) -> int:
    return sum(math.comb(m, i) for i in range(1, min(m, k) + 1))


def enumerate_extended_flower(h: Hypergraph, cap: int = MAX_CANDIDATES) -> list[LinearInequality]:
    out = []
    for e0 in h.edges:
        cand = [e for e in adjacent_edges(h, e0) if len(set(e0).intersection(e)) >= 2]
        if _count_subsets(len(cand), len(e0) // 2) > cap:
            raise GuardError(f"more than {cap} extended flower neighbor sets at {e0}")
        for T in _subsets(cand, len(e0) // 2):
            if min(gammas(e0, list(T))) >= 2:
                out.append(flower_template(e0, T, tag="eflower"))
    return dedupe(out)


def extended_flower_candidate_count(h: Hypergraph) -> int:
    total = 0
    for e0 in h.edges:
        cand = [e for e in adjacent_edges(h, e0) if len(set(e0).intersection(e)) >= 2]
        total += _count_subsets(len(cand), len(e0) // 2)
    return total


def check_point(h: Hypergraph, point: Mapping[VarRef, float]) -> dict[VarRef, float]:
    out = {}
    for ref in h.variables():
        if ref not in point:
            raise InstanceError(f"point has no value for {var_name(ref)}")
        val = float(point[ref])
        if not math.isfinite(val):
            raise InstanceError(f"non-finite value for {var_name(ref)}")
        out[ref] = val
    return out


def pruned_neighbors(h: Hypergraph, e0: VarRef, point: Mapping[VarRef, float]) -> list[VarRef]:
    """One highest-valued edge per intersection pattern f = e0 & e with |f| >= 2."""
    best: dict[VarRef, VarRef] = {}
    for e in adjacent_edges(h, e0):
        f = tuple(v for v in e0 if v in e)
        if len(f) < 2:
            continue
        # edges are scanned in lexicographic order, so ties keep the smallest
        if f not in best or point[e] > point[best[f]]:
            best[f] = e
    return sorted(best.values())


def _sort_cuts(found: dict) -> list[tuple[LinearInequality, float]]:
    cuts = sorted(found.values(), key=lambda p: (-p[1], p[0].meta["center"], p[0].meta["neighbors"]))
    return cuts


def separate_extended_flower(
    h: Hypergraph, point: Mapping[VarRef, float], tol: float = DEFAULT_TOL
) -> list[tuple[LinearInequality, float]]:
    """All extended flower inequalities violated by more than ``tol``, most violated first."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    point = check_point(h, point)
    found: dict = {}
    for e0 in h.edges:
        cand = pruned_neighbors(h, e0, point)
        for T in _subsets(cand, len(e0) // 2):
            T = list(T)
            if min(gammas(e0, T)) < 2:
                continue
            ineq = flower_template(e0, T)
            viol = ineq.violation(point)
            if viol > tol:
                k = ineq.key()
                if k not in found or found[k][1] < viol:
                    found[k] = (ineq, viol)
    return _sort_cuts(found)


def brute_force_separation(
    h: Hypergraph, point: Mapping[VarRef, float], tol: float = DEFAULT_TOL, max_subsets: int = 1 << 16
) -> list[tuple[LinearInequality, float]]:
    """Reference separation over every subset of adjacent edges, no pruning."""
    point = check_point(h, point)
    found: dict = {}
    for e0 in h.edges:
        adj = adjacent_edges(h, e0)
        if 1 << len(adj) > max_subsets:
            raise GuardError(f"{len(adj)} adjacent edges at {e0} exceed the brute-force guard")
        for T in _subsets(adj, len(adj)):
            T = list(T)
            if min(gammas(e0, T)) < 2:
                continue
            ineq = flower_template(e0, T)
            viol = ineq.violation(point)
            if viol > tol:
                k = ineq.key()
                if k not in found or found[k][1] < viol:
                    found[k] = (ineq, viol)
    return _sort_cuts(found)


def binary_points(n: int) -> np.ndarray:
    """All 2**n binary vectors as rows (column j is vertex j+1)."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)


def validity_check(h: Hypergraph, ineq: LinearInequality, max_n: int = 20, atol: float = 1e-9) -> bool:
    """True iff every point of the multilinear set satisfies ``ineq``.

    Any product variable (edge or artificial) is evaluated as the product of
    its vertices, so lifted inequalities can be checked as well.
    """
    if h.n > max_n:
        raise GuardError(f"n={h.n} exceeds validity guard {max_n}")
    X = binary_points(h.n)
    lhs = np.zeros(X.shape[0])
    for ref, c in ineq.coeffs.items():
        if ref[-1] > h.n:
            raise InstanceError(f"{var_name(ref)} is outside the hypergraph")
        lhs += c * X[:, [v - 1 for v in ref]].all(axis=1)
    return bool(np.all(lhs <= ineq.rhs + atol))


def parse_point(text: str, h: Hypergraph) -> dict[VarRef, float]:
    try:
        data = json.loads(text)
        point: dict[VarRef, float] = {(int(k),): float(v) for k, v in data["vertices"].items()}
        for item in data.get("edges", []):
            point[canon(item["vars"])] = float(item["value"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InstanceError(f"malformed point file: {exc}") from exc
    return check_point(h, point)


def render_point(h: Hypergraph, point: Mapping[VarRef, float]) -> str:
    data = {
        "vertices": {str(v): point[(v,)] for v in h.vertices},
        "edges": [{"vars": list(e), "value": point[e]} for e in h.edges],
    }
    return json.dumps(data, indent=1) + "\n"


def cut_report_line(ineq: LinearInequality, violation: float) -> str:
    return json.dumps(
        {
            "tag": ineq.tag,
            "center": list(ineq.meta.get("center", ())),
            "neighbors": [list(e) for e in ineq.meta.get("neighbors", [])],
            "coefficients": [{"vars": list(r), "coef": c} for r, c in ineq.coeffs.items()],
            "rhs": ineq.rhs,
            "violation": violation,
        }
    )
