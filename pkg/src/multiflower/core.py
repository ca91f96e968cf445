"""Hypergraphs, binary polynomial instances and their linearization.

Variables are identified by the sorted tuple of vertices they multiply:
``(3,)`` is the vertex variable z_3 and ``(1, 3, 4)`` the product z_1 z_3 z_4.
Edges of the hypergraph and artificial product variables share this
representation, so equal vertex sets always denote the same variable.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

VarRef = tuple[int, ...]


class InstanceError(ValueError):
    """Malformed instance text or invalid instance data."""


def canon(vertices: Iterable[int]) -> VarRef:
    return tuple(sorted(set(int(v) for v in vertices)))


def var_name(ref: VarRef) -> str:
    if len(ref) == 1:
        return f"z{ref[0]}"
    return "z{" + ",".join(map(str, ref)) + "}"


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple[VarRef, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("hypergraph needs at least one vertex")
        edges = tuple(sorted(canon(e) for e in self.edges))
        for e in edges:
            if len(e) < 2:
                raise InstanceError(f"edge {e} has fewer than two vertices")
            if e[0] < 1 or e[-1] > self.n:
                raise InstanceError(f"edge {e} has a vertex out of range 1..{self.n}")
        if len(set(edges)) != len(edges):
            raise InstanceError("duplicate edges")
        object.__setattr__(self, "edges", edges)

    @property
    def vertices(self) -> list[int]:
        return list(range(1, self.n + 1))

    @property
    def rank(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    @property
    def edge_set(self) -> frozenset[VarRef]:
        return frozenset(self.edges)

    def variables(self) -> list[VarRef]:
        """Vertex variables then edge variables, the original space of the multilinear set."""
        return [(v,) for v in self.vertices] + list(self.edges)


def adjacent_edges(h: Hypergraph, e0: Iterable[int]) -> list[VarRef]:
    e0 = canon(e0)
    if e0 not in h.edge_set:
        raise InstanceError(f"{e0} is not an edge")
    s0 = set(e0)
    return [e for e in h.edges if e != e0 and s0.intersection(e)]


@dataclass(frozen=True)
class PolynomialInstance:
    """max sum c_I prod x_I  s.t.  sum a_I prod x_I <= b, x binary.

    ``objective`` is a tuple of ``(term, coef)`` pairs and ``constraints`` a
    tuple of ``(terms, rhs)`` pairs, all in canonical (sorted, merged) form.
    """

    n: int
    objective: tuple[tuple[VarRef, float], ...]
    constraints: tuple[tuple[tuple[tuple[VarRef, float], ...], float], ...] = field(default=())

    def terms(self) -> list[VarRef]:
        seen = {t for t, _ in self.objective}
        for terms, _ in self.constraints:
            seen.update(t for t, _ in terms)
        return sorted(seen)


def _canonical_terms(raw, n: int) -> tuple[tuple[VarRef, float], ...]:
    merged: dict[VarRef, float] = {}
    for vars_, coef in raw:
        vars_ = list(vars_)
        if not vars_:
            raise InstanceError("empty term")
        for v in vars_:
            if int(v) != v:
                raise InstanceError(f"non-integer vertex {v!r}")
            if not 1 <= v <= n:
                raise InstanceError(f"vertex out of range: {v} not in 1..{n}")
        coef = float(coef)
        if not math.isfinite(coef):
            raise InstanceError("coefficients must be finite")
        key = canon(vars_)
        merged[key] = merged.get(key, 0.0) + coef
    return tuple(sorted((t, c) for t, c in merged.items() if c != 0.0))


def make_instance(n: int, objective, constraints=(), renumber: bool = True) -> PolynomialInstance:
    """Build a canonical instance from ``(vars, coef)`` lists.

    Vertices that appear in no term are removed and the rest renumbered
    consecutively (with a warning) unless ``renumber`` is false.
    """
    if int(n) != n or n < 1:
        raise InstanceError("n must be a positive integer")
    n = int(n)
    obj = _canonical_terms(objective, n)
    cons = []
    for terms, rhs in constraints:
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise InstanceError("right-hand sides must be finite")
        cons.append((_canonical_terms(terms, n), rhs))
    inst = PolynomialInstance(n, obj, tuple(cons))
    if not renumber:
        return inst
    used = sorted({v for t in inst.terms() for v in t})
    if len(used) == n:
        return inst
    if not used:
        raise InstanceError("instance has no nonzero terms")
    warnings.warn(f"vertices {sorted(set(range(1, n + 1)) - set(used))} appear in no term; renumbering")
    relabel = {v: i + 1 for i, v in enumerate(used)}

    def remap(terms):
        return [([relabel[v] for v in t], c) for t, c in terms]

    return make_instance(len(used), remap(inst.objective), [(remap(t), b) for t, b in inst.constraints])


def parse_instance(text: str) -> PolynomialInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict) or "n" not in data or "objective" not in data:
        raise InstanceError("instance must be an object with 'n' and 'objective'")

    def terms_of(items):
        if not isinstance(items, list):
            raise InstanceError("term lists must be arrays")
        out = []
        for item in items:
            try:
                out.append((item["vars"], item["coef"]))
            except (TypeError, KeyError) as exc:
                raise InstanceError(f"malformed term {item!r}") from exc
            if not isinstance(item["vars"], list):
                raise InstanceError(f"malformed term {item!r}")
        return out

    constraints = []
    for row in data.get("constraints", []):
        try:
            terms, rhs, sense = terms_of(row["terms"]), row["rhs"], row.get("sense", "<=")
        except (TypeError, KeyError, AttributeError) as exc:
            raise InstanceError(f"malformed constraint {row!r}") from exc
        if sense == ">=":
            terms, rhs = [(v, -c) for v, c in terms], -rhs
        elif sense != "<=":
            raise InstanceError(f"unsupported constraint sense {sense!r}")
        constraints.append((terms, rhs))
    try:
        return make_instance(data["n"], terms_of(data["objective"]), constraints)
    except TypeError as exc:
        raise InstanceError(str(exc)) from exc


def render_instance(inst: PolynomialInstance) -> str:
    def terms(ts):
        return [{"vars": list(t), "coef": c} for t, c in ts]

    data = {"n": inst.n, "objective": terms(inst.objective)}
    if inst.constraints:
        data["constraints"] = [{"terms": terms(t), "rhs": b} for t, b in inst.constraints]
    return json.dumps(data, indent=1) + "\n"


@dataclass(frozen=True)
class Linearized:
    hypergraph: Hypergraph
    objective: dict[VarRef, float]
    constraints: list[tuple[dict[VarRef, float], float]]


def to_hypergraph(inst: PolynomialInstance) -> Linearized:
    """Replace every product by its own variable; multilinear terms become edges."""
    edges = [t for t in inst.terms() if len(t) >= 2]
    h = Hypergraph(inst.n, tuple(edges))
    objective = {t: c for t, c in inst.objective}
    constraints = [({t: c for t, c in terms}, rhs) for terms, rhs in inst.constraints]
    return Linearized(h, objective, constraints)


def generate_random(n: int, n_edges: int, rank: int, seed: int) -> PolynomialInstance:
    """Random unconstrained instance whose terms are ``n_edges`` distinct edges covering all vertices."""
    if n < 2 or rank < 2 or rank > n or n_edges < 1:
        raise InstanceError("infeasible parameters")
    possible = sum(math.comb(n, k) for k in range(2, rank + 1))
    if n_edges > possible or n_edges * rank < n:
        raise InstanceError("infeasible parameters")
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        edges: set[VarRef] = set()
        while len(edges) < n_edges:
            k = int(rng.integers(2, rank + 1))
            edges.add(canon(int(v) + 1 for v in rng.choice(n, size=k, replace=False)))
        if len(set(itertools.chain.from_iterable(edges))) == n:
            break
    else:
        raise InstanceError("infeasible parameters: could not cover every vertex")
    nonzero = [c for c in range(-10, 11) if c != 0]
    objective = [(list(e), float(nonzero[int(rng.integers(len(nonzero)))])) for e in sorted(edges)]
    return make_instance(n, objective, renumber=False)
