import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jewel import io
from jewel import povm as pv
from jewel import witness as wt
from jewel.compat import joint_feasibility, robustness
from jewel.errors import ValidationError
from jewel.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, random_hermitian
from jewel.povm import MeasurementSet, NoiseModel
from jewel.witness import Verdict, WitnessCandidate

XY = wt.binary([SIGMA_X, SIGMA_Y])
I2 = np.eye(2)


def random_candidate(rng, shape, n):
    X = np.array([random_hermitian(n, rng) for _ in range(sum(k - 1 for k in shape))])
    return WitnessCandidate(shape, X)


def on_boundary(X):
    """Rescale so the exact vertex test is tight."""
    return X.scaled(1 / (1 - wt.exact_slack(X)))


def test_exact_examples():
    assert wt.is_witness_exact(XY.scaled(0.7))
    assert not wt.is_witness_exact(XY.scaled(0.71))
    assert wt.is_witness_exact(XY.scaled(0.0))
    for g in (1, 2, 3, 5):
        W = wt.planar_witness(g)
        assert wt.is_witness_exact(W)
        assert abs(wt.exact_slack(W)) <= 1e-9
        assert not wt.is_witness_exact(W.scaled(1.001))


def test_exact_matches_sign_vector_norms():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X = random_candidate(rng, (2, 2, 2), 3)
        signs = itertools.product((1, -1), repeat=3)
        norms = [np.linalg.norm(sum(e * B for e, B in zip(eps, X.blocks)), 2) for eps in signs]
        assert wt.is_witness_exact(X) == (max(norms) <= 1 + 1e-9)


def test_sdp_margin_examples():
    assert wt.sdp_margin(wt.binary([SIGMA_Z])) == pytest.approx(1.0, abs=1e-7)
    assert wt.sdp_margin(XY) == pytest.approx(0.5, abs=1e-7)
    assert wt.sdp_margin(XY.scaled(0.7)) == pytest.approx(1 / 1.4, abs=1e-6)
    assert wt.sdp_margin(XY.scaled(0.0)) == np.inf


def test_classify_examples():
    c = wt.classify(XY)
    assert c.verdict is Verdict.NOT_WITNESS and c.theta_used == pytest.approx(1 / np.sqrt(2))
    assert wt.classify(XY.scaled(0.5)).verdict is Verdict.WITNESS
    c = wt.classify(XY.scaled(0.7))
    assert c.verdict is Verdict.INDETERMINATE
    assert c.rho == pytest.approx(0.714, abs=1e-3)
    assert wt.is_witness_exact(XY.scaled(0.7))
    assert wt.classify(XY.scaled(0.0)).verdict is Verdict.WITNESS
    # a user-supplied theta moves the NotWitness threshold
    assert wt.classify(XY, theta=0.4).verdict is Verdict.INDETERMINATE


def test_general_shape_classification_is_two_valued():
    rng = np.random.default_rng(5)
    for scale in (0.05, 3.0):
        X = random_candidate(rng, (3, 2), 2).scaled(scale)
        c = wt.classify(X)
        assert np.isnan(c.theta_used)
        assert c.verdict in (Verdict.WITNESS, Verdict.INDETERMINATE)
    assert wt.classify(random_candidate(rng, (3, 2), 2).scaled(0.01)).verdict is Verdict.WITNESS


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_sdp_margin_homogeneous(c):
    rng = np.random.default_rng(int(c * 10))
    for shape in ((2, 2), (3,), (2, 3)):
        X = random_candidate(rng, shape, 2)
        assert wt.sdp_margin(X.scaled(c)) == pytest.approx(wt.sdp_margin(X) / c, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(2, 2), (2, 2, 2), (3,), (3, 2)]), st.integers(2, 3),
       st.floats(0.5, 1.5))
def test_classification_consistency(seed, shape, n, u):
    X = on_boundary(random_candidate(np.random.default_rng(seed), shape, n)).scaled(u)
    exact = wt.is_witness_exact(X, tol=1e-5)
    c = wt.classify(X)
    if c.rho >= 1 - 1e-6:
        assert exact
    if X.binary and exact:
        assert c.rho >= 1 / np.sqrt(X.g) - 1e-6
    assert not (c.verdict is Verdict.WITNESS and not exact)
    assert not (c.verdict is Verdict.NOT_WITNESS and wt.is_witness_exact(X))


def test_apply_examples():
    W = wt.planar_witness(2)
    pair = MeasurementSet((pv.Povm(np.array([(I2 + SIGMA_Y) / 2, (I2 - SIGMA_Y) / 2])),
                           pv.Povm(np.array([(I2 - SIGMA_X) / 2, (I2 + SIGMA_X) / 2]))))
    a = wt.apply_witness(W, pair)
    assert a.max_eig == pytest.approx(np.sqrt(2), abs=1e-9) and a.certified_incompatible
    t = wt.apply_witness(W, MeasurementSet((pv.trivial_povm(2, 2),) * 2))
    assert t.max_eig == pytest.approx(0, abs=1e-12) and not t.certified_incompatible


def test_apply_refuses_non_witness_and_mismatch():
    zx = pv.mub_povms(2, 2)
    with pytest.raises(ValidationError, match="not a witness"):
        wt.apply_witness(XY, zx)
    with pytest.raises(ValidationError, match="shape"):
        wt.apply_witness(wt.planar_witness(3), zx)


def test_apply_is_sound_on_compatible_sets():
    rng = np.random.default_rng(11)
    for _ in range(25):
        shape = ((2, 2), (2, 3), (3, 3))[int(rng.integers(3))]
        d = int(rng.integers(2, 4))
        mset = pv.random_set(d, shape, rng)
        s = robustness(mset).t * float(rng.uniform(0.5, 1.0))
        mset = pv.apply_noise(mset, NoiseModel("balanced", (s,) * len(shape)))
        assert joint_feasibility(mset).compatible
        X = on_boundary(random_candidate(rng, shape, int(rng.integers(1, 4))))
        assert not wt.apply_witness(X, mset).certified_incompatible


@pytest.mark.parametrize("g", [2, 3, 4])
def test_planar_sum_bound(g):
    rng = np.random.default_rng(g)
    base = pv.planar_qubit_set(g, 1.0)
    bound = 1 / np.sin(np.pi / (2 * g))
    for _ in range(3):
        a = rng.uniform(0.1, 1.0, size=g)
        r = robustness(base, direction=a)
        lengths = np.array(r.weights)
        assert joint_feasibility(pv.planar_qubit_set(g, np.minimum(lengths, 1))).compatible
        assert lengths.sum() <= bound + 1e-6


def test_planar_witness_examples():
    lam = np.sin(np.pi / 4)
    assert np.allclose(wt.planar_witness(2).blocks, [lam * SIGMA_Y, -lam * SIGMA_X])
    assert np.allclose(wt.planar_witness(3).blocks[0],
                       0.5 * (np.cos(np.pi / 3) * SIGMA_X + np.sin(np.pi / 3) * SIGMA_Y))
    assert np.allclose(wt.planar_witness(1).blocks, [-SIGMA_X])
    with pytest.raises(ValidationError):
        wt.planar_witness(0)


def test_candidate_validation_and_json():
    with pytest.raises(ValidationError):
        WitnessCandidate((2, 2), np.zeros((3, 2, 2)))
    with pytest.raises(ValidationError):
        WitnessCandidate((1,), np.zeros((0, 2, 2)))
    X = random_candidate(np.random.default_rng(0), (3, 2), 2)
    text = io.dumps(X.to_json())
    back = WitnessCandidate.from_json(io.loads(text))
    assert back.shape == (3, 2) and np.array_equal(back.blocks, X.blocks)
    assert io.dumps(back.to_json()) == text
    doc = X.to_json()
    doc["blocks"] = doc["blocks"][:2]
    with pytest.raises(io.DecodeError, match=r"\$\.blocks"):
        WitnessCandidate.from_json(doc)
    assert wt.classify(XY).to_json()["verdict"] == "NotWitness"
