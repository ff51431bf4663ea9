"""End-to-end checks on the worked triples and randomized property suites."""
import time

import numpy as np
import pytest

from app.models.riccati import SolutionFamily, SolutionSet, SteinEquation, TerminalKind, Tolerance
from app.services import pencil, popov, reduction, solvers
from app.services.riccati_service import RiccatiService
from app.utils import linalg
from tests.conftest import make_random_triple

TIGHT = Tolerance(abs_residual=1e-11)
SQRT5 = np.sqrt(5.0)


def test_example1_end_to_end(example1):
    service = RiccatiService()
    start = time.perf_counter()
    _, solutions = service.solve(example1)
    assert time.perf_counter() - start < 1.0
    assert len(solutions.families) == 1
    family = solutions.families[0]
    np.testing.assert_allclose(family.base, np.diag([1.0, 0.0, 0.0]), atol=1e-10)
    assert family.dimension == 1
    np.testing.assert_allclose(family.basis[0], np.diag([0.0, 0.0, 1.0]), atol=1e-10)
    for xi in (-1.0, 0.0, 2.5):
        assert popov.gdare_residual(example1, family.member([xi])).residual <= 1e-8


def test_example2_end_to_end(example2):
    chain, solutions = RiccatiService().solve(example2)
    assert len(solutions.families) == 1
    np.testing.assert_allclose(solutions.families[0].base, np.diag([3.0, 0.0, -2.0]), atol=1e-8)
    assert [s.deficiency for s in chain.reduction_steps] == [1, 1]
    assert chain.terminal.kind == TerminalKind.STEIN
    assert chain.terminal.stein.a0[0, 0] == pytest.approx(-3.0)
    assert chain.terminal.stein.q0[0, 0] == pytest.approx(1296.0)
    assert reduction.restrict(chain, solutions.families[0].base)[-1][0, 0] == pytest.approx(-162.0)


def test_remark_end_to_end(remark_triple, printed_v_remark):
    chain, solutions = RiccatiService().solve(remark_triple)
    X = solutions.families[0].base
    assert len(solutions.families) == 1
    np.testing.assert_allclose(X, np.diag([0.0, 0.0, -1.0]), atol=1e-8)

    A_X = popov.closed_loop(remark_triple, X)
    np.testing.assert_allclose(A_X, remark_triple.A, atol=1e-8)
    expected = sorted([-5.0, 1.0 - SQRT5, 1.0 + SQRT5])
    np.testing.assert_allclose(sorted(np.linalg.eigvals(A_X).real), expected, atol=1e-8)

    step, _ = reduction.step_kernel_r(remark_triple, basis=printed_v_remark)
    delta = (printed_v_remark.T @ X @ printed_v_remark)[:2, :2] - step.q11
    np.testing.assert_allclose(delta, np.diag([0.0, -25.0]), atol=1e-8)
    A_delta = popov.closed_loop(step.result, delta)
    np.testing.assert_allclose(sorted(np.linalg.eigvals(A_delta).real), [-5.0, 3.0], atol=1e-8)
    assert not reduction.closed_loop_report(step, X, delta).spectrum_contained


def test_pinv_penrose_identities(rng):
    for _ in range(500):
        rows, cols = (int(v) for v in rng.integers(1, 13, size=2))
        r = int(rng.integers(0, min(rows, cols)))
        M = rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols))
        P = linalg.pinv(M)
        assert linalg.max_norm(M @ P @ M - M) <= 1e-8
        assert linalg.max_norm(P @ M @ P - P) <= 1e-8
        assert linalg.max_norm((P @ M).T - P @ M) <= 1e-8
        assert linalg.max_norm((M @ P).T - M @ P) <= 1e-8


def test_cross_elimination_preserves_solutions(rng):
    found = 0
    for _ in range(300):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        sigma = make_random_triple(rng, n, m)
        X = solvers.dare_fixed_point_oracle(sigma, tol=TIGHT)
        if X is None:
            continue
        sigma0 = popov.eliminate_cross(sigma)
        assert popov.is_solution(sigma, X) == popov.is_solution(sigma0, X)
        assert popov.is_solution(sigma, X)
        assert linalg.max_norm(popov.closed_loop(sigma, X) - popov.closed_loop(sigma0, X)) <= 1e-8
        found += 1
        if found == 100:
            break
    assert found == 100


def test_block_rigidity_on_golden_solutions(example1, example2, remark_triple):
    for sigma in (example1, example2, remark_triple):
        chain, solutions = RiccatiService().solve(sigma)
        for family in solutions.families:
            X = family.member([-1.0] * family.dimension)
            levels = [X] + reduction.restrict(chain, X)
            for step, X_step in zip(chain.reduction_steps, levels):
                assert reduction.check_rigidity(step, X_step)


def test_lift_round_trip_on_stein_family(example1, rng):
    chain = reduction.reduce(example1)
    family = solvers.solve_stein(chain.terminal.stein).solution.families[0]
    for _ in range(50):
        delta = family.member(rng.uniform(-10.0, 10.0, size=family.dimension))
        lifted = reduction.lift(chain, SolutionSet(families=(SolutionFamily(base=delta),)))
        assert popov.gdare_residual(example1, lifted.families[0].base).residual <= 1e-8


def test_lift_round_trip_on_scalar_regular_dares(rng):
    checked = 0
    for _ in range(100):
        a, c, b1, b2 = rng.standard_normal(4)
        A = [[a, 0.0], [c, 0.0]]
        B = [[b1], [b2]]
        Q = np.diag(rng.uniform(0.5, 2.0, size=2))
        R = [[rng.uniform(0.5, 2.0)]]
        sigma = popov.new_triple(A, B, Q, R)
        chain = reduction.reduce(sigma)
        if chain.terminal.kind != TerminalKind.REGULAR_DARE:
            continue
        assert chain.terminal.order == 1
        terminal = solvers.solve_regular_dare(chain.terminal.triple)
        for family in reduction.lift(chain, terminal).families:
            assert popov.gdare_residual(sigma, family.base).residual <= 1e-8
            checked += 1
        if checked >= 50:
            break
    assert checked >= 50


def test_stein_matches_truncated_series(rng):
    for _ in range(100):
        k = int(rng.integers(1, 7))
        G = rng.standard_normal((k, k))
        a0 = G * (rng.uniform(0.0, 0.95) / max(linalg.spectral_radius(G), 1e-12))
        C = rng.standard_normal((k, k))
        q0 = C.T @ C
        report = solvers.solve_stein(SteinEquation(a0=a0, q0=q0))
        series = np.zeros((k, k))
        term = q0.copy()
        for _ in range(2000):
            series += term
            term = a0.T @ term @ a0
        X = report.solution.families[0].base
        assert linalg.max_norm(X - series) <= 1e-6 * max(1.0, linalg.max_norm(series))


def test_scalar_regular_dare(scalar_dare):
    solutions = solvers.solve_regular_dare(scalar_dare)
    values = sorted(f.base[0, 0] for f in solutions.families)
    np.testing.assert_allclose(values, [3.0 - 2.0 * np.sqrt(3.0), 3.0 + 2.0 * np.sqrt(3.0)], atol=1e-10)
    stabilizing = next(f for f in solutions.families if f.stabilizing)
    x = stabilizing.base[0, 0]
    assert popov.closed_loop(scalar_dare, stabilizing.base)[0, 0] == pytest.approx(2.0 / (1.0 + x), abs=1e-10)
    oracle = solvers.dare_fixed_point_oracle(scalar_dare)
    assert oracle[0, 0] == pytest.approx(x, abs=1e-8)


def test_pencil_singularity_equivalence(rng):
    for _ in range(200):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        r_singular, a0_singular = (bool(v) for v in rng.integers(0, 2, size=2))
        sigma = make_random_triple(rng, n, m, r_singular=r_singular, a0_singular=a0_singular)
        diagnosis = pencil.diagnose(sigma)
        assert diagnosis.R_singular == r_singular
        assert diagnosis.A0_singular == a0_singular
        assert diagnosis.N_singular == (r_singular or a0_singular)
