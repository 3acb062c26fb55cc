import numpy as np
import pytest

from conftest import KET0, KET1, KET_PLUS, rand_density
from qsdbound.bounds import barnum_knill_upper, montanaro_lower
from qsdbound.ensemble import DensityMatrix, make_ensemble, random_mixed_ensemble, random_pure_ensemble
from qsdbound.errors import BadPovm, CountMismatch, DimensionMismatch, NoConvergence, NotTwoStates, ParseError
from qsdbound.measurement import (
    Povm,
    dual_gap,
    error_probability,
    helstrom_measurement,
    load_povm,
    optimize_measurement,
    outcome_probabilities,
    pretty_good_measurement,
    random_povm,
    save_povm,
    success_probability,
)

HELSTROM_ZERO_PLUS = 0.5 - 1 / (2 * np.sqrt(2))


def computational(dim=2):
    return Povm(tuple(np.diag(np.eye(dim)[k]) for k in range(dim)))


def test_povm_rejects_bad_sum():
    with pytest.raises(BadPovm):
        Povm((np.eye(2), np.eye(2)))


def test_povm_rejects_negative():
    with pytest.raises(BadPovm) as exc:
        Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])))
    assert exc.value.path == "operators[1]"


def test_povm_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        Povm((np.eye(2), np.zeros((3, 3))))


def test_error_orthogonal(orthogonal_pair):
    assert error_probability(computational(), orthogonal_pair) == 0


def test_error_trivial_measurement():
    # always guessing the first state errs exactly when the second was sent
    e = make_ensemble([(0.3, DensityMatrix.pure(KET0)), (0.7, DensityMatrix.pure(KET_PLUS))])
    m = Povm((np.eye(2), np.zeros((2, 2))))
    assert error_probability(m, e) == pytest.approx(0.7, abs=1e-15)


def test_outcome_matrix_columns_are_priors(rng):
    e = make_ensemble([(0.2, rand_density(rng, 3)), (0.5, rand_density(rng, 3)), (0.3, rand_density(rng, 3))])
    m = random_povm(3, 3, seed=4)
    probs = outcome_probabilities(m, e)
    np.testing.assert_allclose(probs.sum(axis=0), e.priors, atol=1e-12)
    assert error_probability(m, e) + success_probability(m, e) == pytest.approx(1, abs=1e-12)


def test_pair_checks(zero_plus):
    with pytest.raises(DimensionMismatch):
        error_probability(computational(3), zero_plus)
    with pytest.raises(CountMismatch):
        error_probability(Povm((np.eye(2),)), zero_plus)


def test_helstrom_zero_plus(zero_plus):
    m = helstrom_measurement(zero_plus)
    assert error_probability(m, zero_plus) == pytest.approx(HELSTROM_ZERO_PLUS, abs=1e-12)


@pytest.mark.parametrize("p", [0.5, 0.2, 0.9])
def test_helstrom_identical_states(p):
    rho = DensityMatrix(np.eye(2) / 2)
    e = make_ensemble([(p, rho), (1 - p, rho)])
    m = helstrom_measurement(e)
    assert error_probability(m, e) == pytest.approx(0.5 - abs(p - 0.5), abs=1e-12)


def test_helstrom_needs_two(rng):
    e = random_pure_ensemble(3, 2, seed=0)
    with pytest.raises(NotTwoStates):
        helstrom_measurement(e)


def test_pgm_zero_plus(zero_plus):
    # symmetric pure pair: the square-root measurement is optimal
    m = pretty_good_measurement(zero_plus)
    err = error_probability(m, zero_plus)
    assert err == pytest.approx(HELSTROM_ZERO_PLUS, abs=1e-12)
    assert montanaro_lower(zero_plus) <= err <= barnum_knill_upper(zero_plus)
    assert montanaro_lower(zero_plus) == pytest.approx(0.125, abs=1e-12)
    assert barnum_knill_upper(zero_plus) == pytest.approx(np.sqrt(0.5), abs=1e-12)


def test_pgm_rank_deficient_average():
    # both states live in span{|0>} of a qutrit; the remainder goes to outcome 0
    ket = np.array([1, 0, 0], dtype=complex)
    e = make_ensemble([(0.5, DensityMatrix.pure(ket)), (0.5, DensityMatrix.pure(ket))])
    m = pretty_good_measurement(e)
    np.testing.assert_allclose(sum(m.operators), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(m.operators[0][1:, 1:], np.eye(2), atol=1e-12)
    assert error_probability(m, e) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_optimizer_matches_helstrom(seed):
    e = random_mixed_ensemble(2, 3, "dirichlet", seed=seed)
    res = optimize_measurement(e)
    assert res.converged
    assert res.error_probability == pytest.approx(error_probability(helstrom_measurement(e), e), abs=1e-6)


def test_optimizer_orthogonal_fast(orthogonal_pair):
    res = optimize_measurement(orthogonal_pair)
    assert res.error_probability <= 1e-9
    assert res.iterations <= 5
    assert res.converged


@pytest.mark.parametrize("seed", range(8))
def test_optimizer_history_monotone_and_bounded(seed):
    e = random_pure_ensemble(4, 3, "dirichlet", seed=seed)
    res = optimize_measurement(e)
    h = np.array(res.history)
    assert np.all(np.diff(h) >= -1e-12)
    lo, hi = montanaro_lower(e), barnum_knill_upper(e)
    assert lo - 1e-9 <= res.error_probability <= error_probability(pretty_good_measurement(e), e) + 1e-12
    assert res.error_probability <= hi + 1e-9
    assert res.dual_gap == pytest.approx(dual_gap(res.povm.operators, e.weighted()), abs=1e-15)


def test_optimizer_not_converged_flag():
    e = random_mixed_ensemble(4, 4, seed=2)
    res = optimize_measurement(e, max_iters=1, cert_tol=1e-14)
    assert not res.converged
    with pytest.raises(NoConvergence) as exc:
        optimize_measurement(e, max_iters=1, cert_tol=1e-14, strict=True)
    assert exc.value.result.iterations == 1


def test_random_povm_valid_and_deterministic():
    a = random_povm(4, 3, seed=17)
    b = random_povm(4, 3, seed=17)
    assert a.n == 4 and a.dim == 3
    for x, y in zip(a.operators, b.operators):
        assert x.tobytes() == y.tobytes()
    np.testing.assert_allclose(sum(a.operators), np.eye(3), atol=1e-12)


def test_povm_round_trip(tmp_path):
    m = random_povm(3, 2, seed=1)
    path = tmp_path / "m.json"
    save_povm(m, path)
    back = load_povm(path)
    for x, y in zip(m.operators, back.operators):
        assert np.abs(x - y).max() <= 1e-15


def test_povm_malformed(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"dim": 2, "operators": [[[[1, 0], [0, 0]], [[0, 0]]]]}')
    with pytest.raises(ParseError) as exc:
        load_povm(path)
    assert exc.value.path.startswith("operators[0]")


def test_povm_states_need_same_count():
    e = make_ensemble([(1 / 3, DensityMatrix.pure(KET0)), (1 / 3, DensityMatrix.pure(KET1)),
                       (1 / 3, DensityMatrix.pure(KET_PLUS))])
    with pytest.raises(CountMismatch):
        outcome_probabilities(computational(), e)
