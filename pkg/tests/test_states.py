import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gentleq import states
from gentleq.errors import DimensionMismatch, InvalidState, OutsideBall, WrongDimension
from gentleq.states import (
    AXIS_KETS,
    BlochVector,
    PureState,
    bloch_to_density,
    density_to_bloch,
    sample_bloch,
    sample_haar_pure,
    trace_distance,
    trace_distance_pure,
)

ket0 = PureState([1, 0])
ket1 = PureState([0, 1])
ketx = PureState(AXIS_KETS["x"][0])


def unit_ball_vectors():
    comp = st.floats(-1, 1, allow_nan=False)
    return st.tuples(comp, comp, comp).filter(lambda v: sum(c * c for c in v) <= 1.0)


def test_bloch_to_density_examples():
    np.testing.assert_allclose(bloch_to_density([0, 0, 0]), np.eye(2) / 2)
    np.testing.assert_allclose(bloch_to_density([0, 0, 1]), np.diag([1, 0]))
    np.testing.assert_allclose(bloch_to_density([1, 0, 0]), np.full((2, 2), 0.5))


def test_outside_ball():
    with pytest.raises(OutsideBall):
        bloch_to_density([0, 0, 1 + 1e-9])
    bloch_to_density([0, 0, 1 + 1e-13])


def test_density_to_bloch_examples():
    assert density_to_bloch(ket1.density()).as_array().tolist() == [0, 0, -1]
    assert density_to_bloch(np.eye(2) / 2).norm() == 0
    y = PureState(AXIS_KETS["y"][0]).density()
    np.testing.assert_allclose(density_to_bloch(y).as_array(), [0, 1, 0], atol=1e-15)


def test_density_to_bloch_wrong_dimension():
    with pytest.raises(WrongDimension):
        density_to_bloch(np.eye(3) / 3)


@settings(max_examples=300)
@given(unit_ball_vectors())
def test_bloch_round_trip(v):
    back = density_to_bloch(bloch_to_density(v)).as_array()
    np.testing.assert_allclose(back, v, atol=1e-12)


def test_round_trip_bulk(rng):
    for _ in range(10_000):
        r = sample_bloch(rng, "ball")
        assert np.max(np.abs(density_to_bloch(bloch_to_density(r)).as_array() - r.as_array())) <= 1e-10


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        states.density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidState):
        states.density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidState):
        states.density_matrix(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_trace_distance_examples():
    assert trace_distance(ket0.density(), ket0.density()) == 0
    assert trace_distance(bloch_to_density([0.3, 0, 0]), bloch_to_density([-0.3, 0, 0])) == pytest.approx(0.3, abs=1e-14)
    assert trace_distance(ket0.density(), ketx.density()) == pytest.approx(0.7071067812, abs=1e-10)


def test_trace_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_qubit_closed_form(rng):
    for _ in range(10_000):
        r1, r2 = sample_bloch(rng).as_array(), sample_bloch(rng).as_array()
        td = trace_distance(bloch_to_density(r1), bloch_to_density(r2))
        assert abs(td - np.linalg.norm(r1 - r2) / 2) <= 1e-9


def test_trace_distance_pure_examples():
    assert trace_distance_pure(ketx, ketx, 5) == 0
    assert trace_distance_pure(ket0, ket1, 1) == 1
    assert trace_distance_pure(ket0, ketx, 2) == pytest.approx(np.sqrt(3) / 2, abs=1e-12)


def test_trace_distance_pure_tensor_oracle():
    a = np.kron(ket0.density(), ket0.density())
    b = np.kron(ketx.density(), ketx.density())
    oracle = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b)))
    assert trace_distance_pure(ket0, ketx, 2) == pytest.approx(oracle, abs=1e-12)


def test_pure_closed_form(rng):
    for i in range(10_000):
        d = (2, 3, 4)[i % 3]
        p, q = sample_haar_pure(d, rng), sample_haar_pure(d, rng)
        assert abs(trace_distance_pure(p, q, 1) - trace_distance(p.density(), q.density())) <= 1e-9


def test_pure_state_canonical_phase():
    a = PureState(np.array([1j, 1]) / np.sqrt(2))
    b = PureState(np.array([1, -1j]) / np.sqrt(2))
    assert a == b
    assert a.amplitudes[0].imag == 0 and a.amplitudes[0].real > 0
    leading_zero = PureState([0, -1j])
    np.testing.assert_allclose(leading_zero.amplitudes, [0, 1])


def test_pure_state_rejects_zero():
    with pytest.raises(InvalidState):
        PureState([0, 0])


def test_mub_overlaps():
    for a, b in (("x", "y"), ("x", "z"), ("y", "z")):
        for s in (0, 1):
            for t in (0, 1):
                assert abs(np.vdot(AXIS_KETS[a][s], AXIS_KETS[b][t])) ** 2 == pytest.approx(0.5, abs=1e-12)


def test_haar_determinism():
    a = sample_haar_pure(2, np.random.default_rng(42))
    b = sample_haar_pure(2, np.random.default_rng(42))
    assert np.array_equal(a.amplitudes, b.amplitudes)


@pytest.mark.parametrize("d", [2, 4])
def test_haar_first_moment(d):
    z = states.sample_haar_batch(d, 100_000, np.random.default_rng(1))
    assert abs(np.mean(np.abs(z[:, 0]) ** 2) - 1 / d) < 0.01


def test_haar_unitary_invariance():
    rng = np.random.default_rng(2)
    u, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    z = states.sample_haar_batch(3, 100_000, rng)
    rot = z @ u.T
    # second moment of |<0|psi>|^2 is 2/(d(d+1)) for Haar vectors
    for s in (z, rot):
        assert abs(np.mean(np.abs(s[:, 0]) ** 4) - 2 / 12) < 0.005


def test_sample_bloch_surface(rng):
    for _ in range(1000):
        assert abs(sample_bloch(rng, "surface").norm() - 1) <= 1e-12


def test_sample_bloch_ball_moments():
    rng = np.random.default_rng(3)
    v = np.array([sample_bloch(rng, "ball").as_array() for _ in range(100_000)])
    assert abs(np.mean(np.linalg.norm(v, axis=1)) - 0.75) < 0.01
    assert np.all(np.abs(v.mean(axis=0)) < 0.01)


def test_state_json_round_trip(rng):
    rho = bloch_to_density([0.1, -0.2, 0.3])
    np.testing.assert_allclose(states.state_from_json(states.state_to_json(rho)), rho, atol=1e-15)
    mixed = states.random_density(3, rng)
    obj = states.state_to_json(mixed)
    assert obj["matrix"]["dim"] == 3
    np.testing.assert_allclose(states.state_from_json(obj), mixed, atol=1e-15)


def test_state_json_errors():
    with pytest.raises(InvalidState):
        states.state_from_json({"foo": 1})
    with pytest.raises(InvalidState):
        states.state_from_json({"matrix": {"dim": 2, "re": [1, 0, 0]}})
    with pytest.raises(OutsideBall):
        states.state_from_json({"bloch": [1, 1, 0]})


def test_bloch_vector_is_frozen():
    b = BlochVector(0.1, 0.2, 0.3)
    with pytest.raises(AttributeError):
        b.x = 0.5
