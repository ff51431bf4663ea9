import pytest
import numpy as np

from app.exceptions import InvariantViolation
from app.models.riccati import PencilPair, SolutionFamily, SolutionSet, Tolerance
from app.services import pencil, popov, reduction, solvers
from tests.conftest import make_random_triple


def solve(sigma):
    chain = reduction.reduce(sigma)
    if chain.terminal.stein is not None:
        terminal = solvers.solve_stein(chain.terminal.stein).solution
    else:
        terminal = solvers.solve_regular_dare(chain.terminal.triple)
    return reduction.lift(chain, terminal)


def test_build_pencil_size(example1):
    pair = pencil.build_pencil(example1)
    assert pair.M.shape == (8, 8)
    assert pair.N.shape == (8, 8)


def test_build_pencil_zero_scalar():
    pair = pencil.build_pencil(popov.new_triple(0, 0, 0, 0, 0))
    np.testing.assert_array_equal(pair.M, np.diag([1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(pair.N, [[0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]])


def test_build_pencil_block_pattern(rng):
    sigma = make_random_triple(rng, 3, 2)
    pair = pencil.build_pencil(sigma)
    n = 3
    np.testing.assert_array_equal(pair.M[:n, :n], np.eye(n))
    np.testing.assert_array_equal(pair.M[n:2 * n, n:2 * n], -sigma.A.T)
    np.testing.assert_array_equal(pair.M[2 * n:, n:2 * n], -sigma.B.T)
    np.testing.assert_array_equal(pair.M[:, 2 * n:], np.zeros((8, 2)))
    np.testing.assert_array_equal(pair.N[:n, :n], sigma.A)
    np.testing.assert_array_equal(pair.N[:n, 2 * n:], sigma.B)
    np.testing.assert_array_equal(pair.N[n:2 * n, :n], sigma.Q)
    np.testing.assert_array_equal(pair.N[n:2 * n, n:2 * n], -np.eye(n))
    np.testing.assert_array_equal(pair.N[n:2 * n, 2 * n:], sigma.S)
    np.testing.assert_array_equal(pair.N[2 * n:, :n], sigma.S.T)
    np.testing.assert_array_equal(pair.N[2 * n:, 2 * n:], sigma.R)


def test_regular_when_r_nonsingular(scalar_dare, identity_r_triple):
    assert pencil.is_regular(pencil.build_pencil(scalar_dare))
    assert pencil.is_regular(pencil.build_pencil(identity_r_triple))


def test_zero_pencil_is_not_regular():
    pair = PencilPair(M=np.zeros((3, 3)), N=np.zeros((3, 3)))
    assert not pencil.is_regular(pair)
    assert pencil.is_regular(PencilPair(M=np.zeros((0, 0)), N=np.zeros((0, 0))))


def test_worked_triples_have_singular_pencils(example1, remark_triple):
    assert not pencil.is_regular(pencil.build_pencil(example1))
    assert not pencil.is_regular(pencil.build_pencil(remark_triple))


def test_regularity_does_not_depend_on_seed(example2):
    pair = pencil.build_pencil(example2)
    assert len({pencil.is_regular(pair, seed=seed) for seed in range(5)}) == 1


def test_diagnose_example1(example1):
    diagnosis = pencil.diagnose(example1, solutions=solve(example1))
    assert diagnosis.R_singular
    assert diagnosis.A0_singular
    assert diagnosis.N_singular
    assert diagnosis.rank_R == 0
    assert diagnosis.closed_loop_singular_predicted
    assert diagnosis.closed_loop_singular_observed


def test_diagnose_example2(example2):
    diagnosis = pencil.diagnose(example2, solutions=solve(example2))
    assert diagnosis.A0_singular
    assert diagnosis.N_singular
    assert diagnosis.rank_RX == 1
    assert diagnosis.closed_loop_singular_predicted == diagnosis.closed_loop_singular_observed


def test_diagnose_remark(remark_triple):
    diagnosis = pencil.diagnose(remark_triple, solutions=solve(remark_triple))
    assert not diagnosis.A0_singular
    assert diagnosis.R_singular
    assert diagnosis.rank_R == 0
    assert diagnosis.rank_RX == 0
    assert diagnosis.closed_loop_singular_predicted is False
    assert diagnosis.closed_loop_singular_observed is False


def test_diagnose_nonsingular_r_predictor_is_a0(scalar_dare):
    diagnosis = pencil.diagnose(scalar_dare, solutions=solve(scalar_dare))
    assert not diagnosis.R_singular
    assert diagnosis.closed_loop_singular_predicted == diagnosis.A0_singular
    assert diagnosis.rank_RX == 1


def test_diagnose_without_solutions(example1):
    diagnosis = pencil.diagnose(example1)
    assert diagnosis.rank_RX is None
    assert diagnosis.closed_loop_singular_predicted is None


def test_diagnose_reports_rank_misclassification():
    # det N = -R·A0 = -1e-7: a coarse cutoff calls N singular, the scalars R and A0 are not
    sigma = popov.new_triple([[1.0 + 1e-7]], [[1.0]], [[1.0]], [[1.0]], [[1.0]])
    coarse = Tolerance(rel=1e-6)
    with pytest.raises(InvariantViolation):
        pencil.diagnose(sigma, coarse)


def test_diagnose_skips_unverified_solutions(example2):
    bogus = SolutionSet(families=(SolutionFamily(base=np.zeros((3, 3))),))
    diagnosis = pencil.diagnose(example2, solutions=bogus)
    assert diagnosis.rank_RX is None
