"""LP models over hypergraph variables, relaxation bounds, cutting planes and exact oracles."""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from multiflower import cuts, rmc
from multiflower.core import Hypergraph, InstanceError, PolynomialInstance, VarRef, to_hypergraph, var_name
from multiflower.cuts import GuardError, LinearInequality
from multiflower.simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, simplex_max

log = logging.getLogger(__name__)

BOUND_TOL = 1e-6
FEAS_TOL = 1e-9


class SolverError(RuntimeError):
    """The LP could not be solved to optimality."""


@dataclass
class LPModel:
    variables: list[VarRef]
    inequalities: list[LinearInequality]
    objective: dict[VarRef, float]
    bounds: dict[VarRef, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise InstanceError("duplicate LP variables")
        for ineq in self.inequalities:
            for ref in ineq.coeffs:
                if ref not in declared:
                    raise InstanceError(f"undeclared variable {var_name(ref)}")
        for ref in self.objective:
            if ref not in declared:
                raise InstanceError(f"undeclared objective variable {var_name(ref)}")
        for ref, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InstanceError(f"bad bounds for {var_name(ref)}")

    def bound(self, ref: VarRef) -> tuple[float, float]:
        return self.bounds.get(ref, (0.0, 1.0))

    def add(self, ineqs: Iterable[LinearInequality]):
        self.inequalities.extend(ineqs)


@dataclass
class LPSolution:
    status: str
    value: float
    point: dict[VarRef, float]
    pivots: int = 0


def solve(model: LPModel, max_iter: int = 100_000) -> LPSolution:
    """Maximize the model objective with the dense simplex.

    Variables are shifted to lower bound zero and their upper bounds become
    explicit rows, so the simplex only sees ``A x <= b, x >= 0``.
    """
    idx = {ref: i for i, ref in enumerate(model.variables)}
    n = len(idx)
    lo = np.array([model.bound(r)[0] for r in model.variables])
    hi = np.array([model.bound(r)[1] for r in model.variables])
    m = len(model.inequalities)
    A = np.zeros((m + n, n))
    b = np.empty(m + n)
    for i, ineq in enumerate(model.inequalities):
        for ref, c in ineq.coeffs.items():
            A[i, idx[ref]] = c
        b[i] = ineq.rhs
    A[m + np.arange(n), np.arange(n)] = 1.0
    b[:m] -= A[:m] @ lo
    b[m:] = hi - lo
    c = np.zeros(n)
    for ref, coef in model.objective.items():
        c[idx[ref]] = coef
    res = simplex_max(c, A, b, max_iter=max_iter)
    log.debug("simplex: %s after %d pivots (%d degenerate)", res.status, res.pivots, res.degenerate)
    if res.status != OPTIMAL:
        return LPSolution(res.status, float("nan"), {}, res.pivots)
    x = np.clip(res.x + lo, lo, hi)
    point = {ref: float(x[i]) for ref, i in idx.items()}
    return LPSolution(OPTIMAL, float(c @ x), point, res.pivots)


def solve_or_raise(model: LPModel) -> LPSolution:
    sol = solve(model)
    if sol.status != OPTIMAL:
        raise SolverError(f"LP not solved: {sol.status}")
    return sol


def is_feasible(model: LPModel, fixed: Mapping[VarRef, float]) -> bool:
    """Whether the model has a point agreeing with ``fixed`` on the given variables."""
    bounds = dict(model.bounds)
    for ref, val in fixed.items():
        bounds[ref] = (val, val)
    lo_hi = {r: bounds.get(r, (0.0, 1.0)) for r in model.variables}
    if any(lo > hi for lo, hi in lo_hi.values()):
        return False
    probe = LPModel(model.variables, list(model.inequalities), {}, bounds)
    return solve(probe).status == OPTIMAL


def fourier_motzkin_eliminate(
    system: list[LinearInequality], var: VarRef, max_size: int = 10_000
) -> list[LinearInequality]:
    """Project ``var`` out of ``system``; duplicates are removed syntactically."""
    pos, neg, rest = [], [], []
    for ineq in system:
        c = ineq.coeffs.get(var, 0.0)
        (pos if c > 0 else neg if c < 0 else rest).append(ineq)
    if len(rest) + len(pos) * len(neg) > max_size:
        raise GuardError(f"Fourier-Motzkin step would produce {len(rest) + len(pos) * len(neg)} rows")
    out = list(rest)
    for p in pos:
        for q in neg:
            a, b = p.coeffs[var], -q.coeffs[var]
            coeffs: dict[VarRef, float] = {}
            for ref, c in p.coeffs.items():
                coeffs[ref] = coeffs.get(ref, 0.0) + b * c
            for ref, c in q.coeffs.items():
                coeffs[ref] = coeffs.get(ref, 0.0) + a * c
            coeffs.pop(var, None)
            coeffs = {r: c for r, c in coeffs.items() if abs(c) > 1e-12}
            rhs = b * p.rhs + a * q.rhs
            scale = max((abs(c) for c in coeffs.values()), default=1.0)
            out.append(LinearInequality({r: c / scale for r, c in coeffs.items()}, rhs / scale, "fm"))
    kept = []
    for ineq in cuts.dedupe(out):
        if not ineq.coeffs and ineq.rhs >= -1e-12:
            continue
        kept.append(ineq)
    return kept


def satisfies(system: Iterable[LinearInequality], point: Mapping[VarRef, float], tol: float = FEAS_TOL) -> bool:
    return all(ineq.violation(point) <= tol for ineq in system)


def _instance_rows(constraints) -> list[LinearInequality]:
    return [LinearInequality(dict(lhs), rhs, "instance") for lhs, rhs in constraints]


@dataclass
class CuttingPlaneResult:
    bound: float
    cuts: list[LinearInequality]
    rounds: int
    converged: bool
    history: list[float]
    solution: LPSolution


Separator = Callable[[Mapping[VarRef, float]], list[tuple[LinearInequality, float]]]


def cutting_plane_loop(
    base: LPModel, separator: Separator, tol: float = cuts.DEFAULT_TOL, max_rounds: int = 100
) -> CuttingPlaneResult:
    """Solve, separate at the optimum, add every violated cut, repeat.

    ``rounds`` counts the rounds in which cuts were added.
    """
    model = LPModel(list(base.variables), list(base.inequalities), dict(base.objective), dict(base.bounds))
    seen = {ineq.key() for ineq in model.inequalities}
    added: list[LinearInequality] = []
    history = []
    rounds = 0
    while True:
        sol = solve_or_raise(model)
        history.append(sol.value)
        found = [ineq for ineq, viol in separator(sol.point) if viol > tol and ineq.key() not in seen]
        if not found:
            return CuttingPlaneResult(sol.value, added, rounds, True, history, sol)
        if rounds >= max_rounds:
            return CuttingPlaneResult(sol.value, added, rounds, False, history, sol)
        for ineq in found:
            seen.add(ineq.key())
        model.add(found)
        added.extend(found)
        rounds += 1


@dataclass
class BoundResult:
    method: str
    bound: float
    n_vars: int
    n_ineqs: int
    rounds: int = 0
    cuts_added: int = 0
    converged: bool = True
    point: dict[VarRef, float] = field(default_factory=dict, repr=False)
    ms: float = 0.0


def rmc_model(inst: PolynomialInstance, r: rmc.RecursiveMcCormick) -> LPModel:
    lin = to_hypergraph(inst)
    ineqs = rmc.rmc_constraints(r) + _instance_rows(lin.constraints)
    return LPModel(r.variables(), ineqs, dict(lin.objective))


def relaxation_model(inst: PolynomialInstance, method: str, flower_cap: int = cuts.MAX_CANDIDATES) -> LPModel:
    """The lifted LP for ``std``, ``flower`` or (fully enumerated) ``eflower``."""
    lin = to_hypergraph(inst)
    h = lin.hypergraph
    ineqs = cuts.standard_linearization(h)
    if method == "flower":
        ineqs += cuts.enumerate_flower(h, flower_cap)
    elif method == "eflower":
        ineqs += cuts.enumerate_extended_flower(h, flower_cap)
    elif method != "std":
        raise ValueError(f"unknown method {method!r}")
    ineqs += _instance_rows(lin.constraints)
    return LPModel(h.variables(), ineqs, dict(lin.objective))


def relaxation_bound(
    inst: PolynomialInstance,
    method: str = "std",
    rmc_strategy=None,
    tol: float = cuts.DEFAULT_TOL,
    max_rounds: int = 100,
    eflower_mode: str = "auto",
    enumerate_below: int = 10_000,
) -> BoundResult:
    """Upper bound on the instance optimum from one relaxation.

    ``method`` is ``std``, ``flower``, ``eflower`` or ``rmc``; for ``rmc``
    pass ``rmc_strategy`` as a strategy name, a partition map or a built
    :class:`~multiflower.rmc.RecursiveMcCormick`.  ``eflower_mode`` chooses
    full enumeration, the separation loop, or (``auto``) enumeration when
    fewer than ``enumerate_below`` neighbor sets are possible.
    """
    start = time.perf_counter()
    lin = to_hypergraph(inst)
    h = lin.hypergraph
    rounds = added = 0
    converged = True
    if method == "rmc":
        if isinstance(rmc_strategy, rmc.RecursiveMcCormick):
            r = rmc_strategy
        else:
            r = rmc.build_rmc(h, rmc_strategy or "leftmost")
        model = rmc_model(inst, r)
        sol = solve_or_raise(model)
    elif method == "eflower":
        if eflower_mode not in ("auto", "enumerate", "cuts"):
            raise ValueError(f"unknown eflower mode {eflower_mode!r}")
        use_cuts = eflower_mode == "cuts" or (
            eflower_mode == "auto" and cuts.extended_flower_candidate_count(h) >= enumerate_below
        )
        if use_cuts:
            base = relaxation_model(inst, "std")
            res = cutting_plane_loop(base, lambda pt: cuts.separate_extended_flower(h, pt, tol), tol, max_rounds)
            sol, rounds, added, converged = res.solution, res.rounds, len(res.cuts), res.converged
            model = LPModel(base.variables, base.inequalities + res.cuts, base.objective)
        else:
            model = relaxation_model(inst, "eflower")
            sol = solve_or_raise(model)
    else:
        model = relaxation_model(inst, method)
        sol = solve_or_raise(model)
    ms = (time.perf_counter() - start) * 1000.0
    return BoundResult(
        method, sol.value, len(model.variables), len(model.inequalities), rounds, added, converged, sol.point, ms
    )


def multilinear_values(h_or_n, X: np.ndarray, refs: Iterable[VarRef]) -> np.ndarray:
    """Columns prod_{v in ref} x_v for every row of the binary matrix X."""
    cols = [X[:, [v - 1 for v in ref]].all(axis=1) for ref in refs]
    return np.stack(cols, axis=1).astype(float) if cols else np.zeros((X.shape[0], 0))


def brute_force_optimum(inst: PolynomialInstance, max_n: int = 24, chunk: int = 1 << 16):
    """Exact optimum by enumerating every binary point; returns (value, x) with x a 0/1 tuple."""
    n = inst.n
    if n > max_n:
        raise GuardError(f"n={n} exceeds brute-force guard {max_n}")
    terms = inst.terms()
    col = {t: i for i, t in enumerate(terms)}
    c = np.zeros(len(terms))
    for t, coef in inst.objective:
        c[col[t]] = coef
    A = np.zeros((len(inst.constraints), len(terms)))
    b = np.array([rhs for _, rhs in inst.constraints])
    for i, (ts, _) in enumerate(inst.constraints):
        for t, coef in ts:
            A[i, col[t]] = coef
    best_val, best_x = -math.inf, None
    total = 1 << n
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        X = ((idx[:, None] >> np.arange(n)) & 1).astype(bool)
        Z = multilinear_values(n, X, terms)
        vals = Z @ c
        if len(b):
            ok = np.all(Z @ A.T <= b + 1e-9, axis=1)
            vals = np.where(ok, vals, -np.inf)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_x = float(vals[k]), tuple(int(v) for v in X[k])
    if best_x is None:
        raise InstanceError("instance is infeasible")
    return best_val, best_x


def vertex_enumeration_max(c: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float = 1e-9):
    """max c @ x over {A x <= b, x >= 0} by trying every basis; None if infeasible.

    Exponential reference used to check :func:`simplex_max`.
    """
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = None
    for rows in itertools.combinations(range(m + n), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + tol):
            val = float(c @ x)
            if best is None or val > best:
                best = val
    return best

