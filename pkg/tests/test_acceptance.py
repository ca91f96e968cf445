"""Acceptance criteria 1-9, each with its tolerance and time budget.

Every test records its outcome; a summary with one PASS/FAIL line per
criterion is printed at the end of the pytest run.
"""

import functools
import json
import time

import numpy as np
import pytest

from multiflower import cuts, rmc
from multiflower.cli import main as cli_main
from multiflower.core import Hypergraph, make_instance, to_hypergraph
from multiflower.cuts import flower_inequality, flower_template, standard_linearization, validity_check
from multiflower.lpsolve import (
    LPModel,
    brute_force_optimum,
    fourier_motzkin_eliminate,
    is_feasible,
    relaxation_bound,
    satisfies,
    solve_or_raise,
)

from conftest import (
    ACCEPTANCE,
    CUBIC4_DISJOINT,
    CUBIC4_SHARED34,
    E0_NINE,
    NINE_PETALS,
    SQUARE_CENTER,
    SQUARE_PETALS,
    data_path,
    random_instances,
    random_point,
    running_intersection_fixtures,
)

pytestmark = pytest.mark.acceptance

BOUND_TOL = 1e-6


def criterion(num, part, budget):
    """Record outcome and wall time of one part of a criterion; exceeding ``budget`` seconds fails it."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            detail = ""
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                detail = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
                raise
            finally:
                secs = time.perf_counter() - start
                if not detail and secs > budget:
                    detail = f"took {secs:.1f}s > {budget}s"
                ACCEPTANCE.setdefault(num, []).append((part, not detail, secs, detail))
            assert secs <= budget, f"took {secs:.1f}s > {budget}s"

        return run

    return wrap


def objective_instance(h, obj):
    """Instance maximizing a linear objective over the vertex and edge variables of ``h``."""
    return make_instance(h.n, [(list(ref), c) for ref, c in obj.items()], renumber=False)


def random_objective(h, rng):
    return {ref: float(rng.normal()) for ref in h.variables()}


def lp_max(variables, ineqs, obj):
    return solve_or_raise(LPModel(variables, ineqs, obj)).value


# shared instance suites, regenerated by criterion 9


def suite4():
    return random_instances(200, seed=4004, n_range=(3, 6), edge_range=(1, 4), rank_range=(2, 4))


def suite5():
    return random_instances(30, seed=5005, n_range=(3, 6), edge_range=(1, 4), rank_range=(3, 4))


def suite7():
    return random_instances(200, seed=7007, n_range=(4, 8), edge_range=(2, 6), rank_range=(3, 4))


def suite8():
    return random_instances(100, seed=8008, n_range=(4, 12), edge_range=(2, 6), rank_range=(3, 5))


def square_objectives():
    h = Hypergraph(8, (SQUARE_CENTER, *SQUARE_PETALS))
    rng = np.random.default_rng(3003)
    return h, [random_objective(h, rng) for _ in range(20)]


def cubic4_objectives():
    rng = np.random.default_rng(6006)
    return [{ref: float(rng.normal()) for ref in [(1,), (2,), (3,), (4,), (1, 2, 3), (1, 3, 4), (2, 3, 4)]} for _ in range(20)]


# 1


@criterion(1, "golden bounds", 1.0)
def test_criterion_1_golden_bounds(cubic4):
    assert abs(relaxation_bound(cubic4, "std").bound - 4 / 3) <= BOUND_TOL
    assert abs(relaxation_bound(cubic4, "flower").bound - 1.0) <= BOUND_TOL
    assert abs(relaxation_bound(cubic4, "rmc", CUBIC4_DISJOINT).bound - 4 / 3) <= BOUND_TOL
    assert brute_force_optimum(cubic4)[0] == 1.0


@criterion(1, "rmc R2 bound", 1.0)
def test_criterion_1_rmc_r2(cubic4):
    got = relaxation_bound(cubic4, "rmc", CUBIC4_SHARED34).bound
    assert abs(got - 1.0) <= BOUND_TOL, f"bound(rmc,R2)={got:.9f}, expected 1.0"


# 2


@criterion(2, "golden cut", 1.0)
def test_criterion_2_golden_cut(nine_h, nine_point, capsys):
    std = standard_linearization(nine_h)
    assert len(std) == 38
    assert all(row.violation(nine_point) <= 0 for row in std)
    assert all(flower_inequality(nine_h, E0_NINE, [p]).violation(nine_point) <= 0 for p in NINE_PETALS)
    assert all(row.violation(nine_point) <= 0 for row in running_intersection_fixtures())
    exf = flower_template(E0_NINE, NINE_PETALS)
    assert exf.rhs == 2.0
    assert abs(exf.violation(nine_point) - 0.25) <= 1e-12
    code = cli_main(["separate", str(data_path("nine_vertex.json")), "--point", str(data_path("nine_vertex_point.json"))])
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    found = [json.loads(line) for line in lines]
    assert any(
        c["center"] == list(E0_NINE) and sorted(c["neighbors"]) == sorted(map(list, NINE_PETALS)) and abs(c["violation"] - 0.25) <= 1e-12
        for c in found
    )


# 3


@criterion(3, "rmc limitation", 30.0)
def test_criterion_3_rmc_limitation(square_h):
    six = [flower_inequality(square_h, SQUARE_CENTER, [p]) for p in SQUARE_PETALS]
    six += [flower_inequality(square_h, SQUARE_CENTER, T) for T in ([(1, 2, 5), (3, 4, 7)], [(1, 4, 8), (2, 3, 6)])]
    rmcs = rmc.enumerate_rmcs(square_h)
    shapes = {tuple(sorted(len(p) for p in r.sequences[SQUARE_CENTER])) for r in rmcs}
    assert shapes == {(2, 2, 4), (2, 3, 4)}
    h, objectives = square_objectives()
    flower_system = standard_linearization(h) + cuts.enumerate_flower(h)
    flower_bounds = [lp_max(h.variables(), flower_system, obj) for obj in objectives]
    for r in rmcs:
        system = rmc.rmc_constraints(r)
        witness = None
        for ineq in six:
            sol = solve_or_raise(LPModel(r.variables(), system, dict(ineq.coeffs)))
            if sol.value > ineq.rhs + 1e-9:
                witness = sol.point
                break
        assert witness is not None, f"RMC {r.partition} implies all six inequalities"
        assert is_feasible(LPModel(r.variables(), system, {}), witness)
        for obj, fb in zip(objectives, flower_bounds):
            assert fb <= lp_max(r.variables(), system, obj) + BOUND_TOL


# 4


@criterion(4, "eflower <= every rmc", 300.0)
def test_criterion_4_eflower_below_rmc():
    total = 0
    for inst in suite4():
        h = to_hypergraph(inst).hypergraph
        ef = relaxation_bound(inst, "eflower").bound
        for r in rmc.enumerate_rmcs(h):
            bound = relaxation_bound(inst, "rmc", r).bound
            assert ef <= bound + BOUND_TOL, f"eflower {ef} > rmc {bound} for {r.partition}"
            total += 1
    assert total >= 200


# 5


@criterion(5, "non-overlapping rmc = std; overlap witnesses", 60.0)
def test_criterion_5_non_overlapping():
    rng = np.random.default_rng(55)
    cases = set()
    checked = 0
    extra = Hypergraph(4, ((1, 2), (1, 2, 3, 4)))
    pool = [to_hypergraph(inst).hypergraph for inst in suite5()] + [extra]
    for h in pool:
        std = standard_linearization(h)
        for r in rmc.enumerate_rmcs(h):
            if rmc.is_non_overlapping(r):
                system = rmc.rmc_constraints(r)
                for _ in range(50):
                    obj = random_objective(h, rng)
                    assert abs(lp_max(r.variables(), system, obj) - lp_max(h.variables(), std, obj)) <= BOUND_TOL
                checked += 1
            else:
                point, case, _, violated = rmc.overlap_witness(r)
                assert satisfies(std, point)
                assert violated.violation(point) > 1e-9
                assert not satisfies(rmc.rmc_projection_system(r), point)
                assert not is_feasible(LPModel(r.variables(), rmc.rmc_constraints(r), {}), point)
                cases.add(case)
    assert checked > 0
    assert cases == {"i", "ii"}


# 6


@criterion(6, "projection equivalence", 120.0)
def test_criterion_6_projection(cubic4_h):
    rng = np.random.default_rng(66)
    objectives = cubic4_objectives()
    verdicts = set()
    for r in rmc.enumerate_rmcs(cubic4_h):
        lifted = rmc.rmc_constraints(r)
        proj = rmc.rmc_projection_system(r)
        for obj in objectives:
            a = lp_max(r.variables(), lifted, obj)
            b = lp_max(cubic4_h.variables(), proj, obj)
            assert abs(a - b) <= BOUND_TOL
        fm = rmc.rmc_constraints(r, box=True)
        for art in r.artificial:
            fm = fourier_motzkin_eliminate(fm, art)
        X = cuts.binary_points(4)
        for _ in range(1000):
            x = X[rng.integers(len(X))]
            corner = {ref: float(all(x[v - 1] for v in ref)) for ref in cubic4_h.variables()}
            lam = 0.5 * rng.random()
            point = {ref: (1 - lam) * corner[ref] + lam * rng.random() for ref in corner}
            inside = satisfies(proj, point, 1e-9)
            assert satisfies(fm, point, 1e-9) == inside
            verdicts.add(inside)
    assert verdicts == {True, False}


# 7


def _separation_points(h, rng):
    """Alternate uniform points with standard-linearization optima, which violate cuts more often."""
    yield random_point(h, rng)
    obj = random_objective(h, rng)
    yield solve_or_raise(LPModel(h.variables(), standard_linearization(h), obj)).point


@criterion(7, "separation = brute force", 60.0)
def test_criterion_7_separation():
    rng = np.random.default_rng(77)
    pairs = violated = 0
    for inst in suite7():
        h = to_hypergraph(inst).hypergraph
        for point in _separation_points(h, rng):
            if pairs == 200:
                break
            fast = cuts.separate_extended_flower(h, point)
            slow = cuts.brute_force_separation(h, point)
            assert bool(fast) == bool(slow)
            if fast:
                violated += 1
                assert abs(fast[0][1] - slow[0][1]) <= 1e-9
            for cut, _ in fast:
                assert len(cut.meta["neighbors"]) <= h.rank // 2
            for e0 in h.edges:
                assert len(cuts.pruned_neighbors(h, e0, point)) <= 2 ** h.rank - h.rank - 1
            pairs += 1
    assert pairs == 200
    assert violated > 0


# 8


@criterion(8, "cut validity", 120.0)
def test_criterion_8_validity():
    count = 0
    for inst in suite8():
        h = to_hypergraph(inst).hypergraph
        system = cuts.enumerate_flower(h) + cuts.enumerate_extended_flower(h)
        for strategy in ("leftmost", "balanced"):
            system += rmc.rmc_projection_system(rmc.build_rmc(h, strategy))
        for ineq in cuts.dedupe(system):
            assert validity_check(h, ineq), f"invalid: {ineq}"
            count += 1
    assert count > 0


# 9


def _chain_instances():
    insts = suite4() + suite5() + suite7() + suite8()
    h, objectives = square_objectives()
    insts += [objective_instance(h, obj) for obj in objectives]
    insts += [objective_instance(Hypergraph(4, ((1, 2, 3), (1, 3, 4), (2, 3, 4))), obj) for obj in cubic4_objectives()]
    return insts


@criterion(9, "dominance chain", 300.0)
def test_criterion_9_dominance():
    for inst in _chain_instances():
        exact = brute_force_optimum(inst)[0]
        std = relaxation_bound(inst, "std").bound
        fl = relaxation_bound(inst, "flower").bound
        ef = relaxation_bound(inst, "eflower").bound
        assert ef <= fl + BOUND_TOL
        assert fl <= std + BOUND_TOL
        assert ef >= exact - BOUND_TOL


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
