import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import KET0, KET1, KET_PLUS
from qsdbound.ensemble import (
    DensityMatrix,
    Ensemble,
    load_ensemble,
    make_ensemble,
    random_mixed_ensemble,
    random_pure_ensemble,
    save_ensemble,
    tensor_power,
)
from qsdbound.errors import BadPriors, BadState, DimensionMismatch, ParseError, TooLarge, ValidationError
from qsdbound.linalg import fidelity, kron


def test_make_ensemble_orthogonal_qubits():
    e = make_ensemble([(0.5, np.outer(KET0, KET0)), (0.5, np.outer(KET1, KET1))])
    assert e.n == 2 and e.dim == 2
    assert e.priors == (0.5, 0.5)


def test_bad_priors():
    rho = np.eye(2) / 2
    with pytest.raises(BadPriors):
        make_ensemble([(0.6, rho), (0.6, rho)])
    with pytest.raises(BadPriors):
        make_ensemble([(1.5, rho), (-0.5, rho)])


def test_bad_trace():
    with pytest.raises(BadState) as exc:
        make_ensemble([(1.0, np.diag([0.9, 0.0]))])
    assert exc.value.path == "entries[0].matrix"


def test_non_psd_state_rejected():
    with pytest.raises(BadState):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_non_hermitian_state_rejected():
    with pytest.raises(BadState):
        DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        make_ensemble([(0.5, np.eye(2) / 2), (0.5, np.eye(3) / 3)])


def test_empty_ensemble():
    with pytest.raises(ValidationError):
        make_ensemble([])


def test_duplicate_states_allowed():
    rho = DensityMatrix(np.eye(2) / 2)
    e = make_ensemble([(0.3, rho), (0.7, rho)])
    assert e.states[0] == e.states[1]


def test_density_matrix_is_read_only():
    rho = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_pure_state_detection():
    assert DensityMatrix.pure(KET_PLUS).is_pure()
    assert not DensityMatrix(np.eye(2) / 2).is_pure()


def test_random_pure_single():
    e = random_pure_ensemble(1, 2, seed=7)
    (rho,) = e.states
    assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-12)
    assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 1


@pytest.mark.parametrize("gen", [random_pure_ensemble, random_mixed_ensemble])
@pytest.mark.parametrize("priors", ["uniform", "dirichlet"])
def test_generators_deterministic(gen, priors):
    a = gen(4, 3, priors, seed=123)
    b = gen(4, 3, priors, seed=123)
    assert a.priors == b.priors
    for x, y in zip(a.states, b.states):
        assert x.matrix.tobytes() == y.matrix.tobytes()
    c = gen(4, 3, priors, seed=124)
    assert not np.array_equal(a.states[0].matrix, c.states[0].matrix)


def test_random_pure_fidelities_in_range():
    e = random_pure_ensemble(3, 2, seed=42)
    for a in e.states:
        for b in e.states:
            assert 0 <= fidelity(a, b) <= 1


def test_pure_fidelity_is_squared_overlap():
    e = random_pure_ensemble(2, 3, seed=5)
    # the state vector is the top eigenvector
    vecs = [np.linalg.eigh(s.matrix)[1][:, -1] for s in e.states]
    assert fidelity(*e.states) == pytest.approx(abs(np.vdot(*vecs)) ** 2, abs=1e-12)


def test_dirichlet_priors_vary():
    e = random_mixed_ensemble(5, 2, "dirichlet", seed=3)
    assert sum(e.priors) == pytest.approx(1, abs=1e-12)
    assert len(set(e.priors)) == 5


def test_unknown_prior_kind():
    with pytest.raises(ValueError):
        random_pure_ensemble(2, 2, "skewed", seed=0)


def test_hilbert_schmidt_qubit_purity():
    # Hilbert-Schmidt qubit states are uniform in the Bloch ball, so
    # E[r^2] = 3/5 and E[tr rho^2] = (1 + E[r^2]) / 2 = 4/5
    e = random_mixed_ensemble(20000, 2, seed=11)
    purity = np.array([np.trace(s.matrix @ s.matrix).real for s in e.states])
    r2 = 2 * purity - 1
    assert r2.mean() == pytest.approx(0.6, abs=0.05)
    assert purity.mean() == pytest.approx(0.8, abs=0.05)


def test_tensor_power_identity_for_one_copy(zero_plus):
    assert tensor_power(zero_plus, 1) is zero_plus


def test_tensor_power_squares_fidelity(zero_plus):
    e2 = tensor_power(zero_plus, 2)
    assert e2.dim == 4
    assert e2.priors == zero_plus.priors
    assert fidelity(*e2.states) == pytest.approx(fidelity(*zero_plus.states) ** 2, abs=1e-12)


def test_tensor_power_too_large():
    e = random_mixed_ensemble(2, 3, seed=0)
    with pytest.raises(TooLarge):
        tensor_power(e, 9)
    tensor_power(e, 5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32), a=st.integers(1, 3), b=st.integers(1, 3))
def test_tensor_power_additive(seed, a, b):
    e = random_mixed_ensemble(2, 2, seed=seed)
    ea, eb, eab = tensor_power(e, a), tensor_power(e, b), tensor_power(e, a + b)
    for sa, sb, sab in zip(ea.states, eb.states, eab.states):
        assert np.abs(kron(sa.matrix, sb.matrix) - sab.matrix).max() <= 1e-12


def test_permuted():
    e = random_pure_ensemble(3, 2, "dirichlet", seed=1)
    p = e.permuted([2, 0, 1])
    assert p.priors == (e.priors[2], e.priors[0], e.priors[1])
    assert p.states[0] is e.states[2]


# --- file format --------------------------------------------------------------


def test_round_trip(tmp_path):
    e = random_mixed_ensemble(3, 3, "dirichlet", seed=9)
    path = tmp_path / "e.json"
    save_ensemble(e, path)
    back = load_ensemble(path)
    assert back.priors == e.priors
    for a, b in zip(e.states, back.states):
        assert np.abs(a.matrix - b.matrix).max() <= 1e-15


def test_schema_on_disk(tmp_path):
    e = make_ensemble([(0.25, np.outer(KET0, KET0)), (0.75, np.eye(2) / 2)])
    path = tmp_path / "e.json"
    save_ensemble(e, path)
    doc = json.loads(path.read_text())
    assert doc["dim"] == 2
    assert doc["entries"][0]["prob"] == 0.25
    assert doc["entries"][1]["matrix"] == [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]


def test_integer_literals_accepted(tmp_path):
    path = tmp_path / "e.json"
    path.write_text('{"dim": 2, "entries": [{"prob": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]}')
    e = load_ensemble(path)
    np.testing.assert_array_equal(e.states[0].matrix, np.diag([1, 0]))


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"dim": "2", "entries": []}, "dim"),
        ({"dim": 2}, "entries"),
        ({"dim": 2, "entries": [{"matrix": [[[1, 0]]]}]}, "entries[0].prob"),
        ({"dim": 2, "entries": [{"prob": 1}]}, "entries[0].matrix"),
        ({"dim": 2, "entries": [{"prob": 1, "matrix": [[[1, 0], [0]], [[0, 0], [0, 0]]]}]},
         "entries[0].matrix[0][1]"),
        ({"dim": 2, "entries": [{"prob": 1, "matrix": [[[1, 0], [0, "x"]], [[0, 0], [0, 0]]]}]},
         "entries[0].matrix[0][1]"),
    ],
)
def test_malformed_names_field(tmp_path, doc, field):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ParseError) as exc:
        load_ensemble(path)
    assert exc.value.path == field
    assert field in str(exc.value)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_ensemble(path)


def test_dim_mismatch_in_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 3, "entries": [
        {"prob": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]}))
    with pytest.raises(ValidationError) as exc:
        load_ensemble(path)
    assert exc.value.path == "entries[0].matrix"


def test_invalid_priors_in_file(tmp_path):
    path = tmp_path / "bad.json"
    m = [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]
    path.write_text(json.dumps({"dim": 2, "entries": [{"prob": 0.6, "matrix": m}, {"prob": 0.6, "matrix": m}]}))
    with pytest.raises(BadPriors):
        load_ensemble(path)


def test_ensemble_constructor_validates():
    rho = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(BadPriors):
        Ensemble((0.2, 0.2), (rho, rho))
