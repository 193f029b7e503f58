"""Acceptance criteria, one PASS/FAIL line each.

Every test records its line through the ``acceptance`` fixture before
asserting, so a failing criterion still reports what it measured.
"""

import time

import numpy as np
import pytest

from jewel import bounds as bd
from jewel import povm as pv
from jewel import spectra as sp
from jewel import witness as wt
from jewel.compat import joint_feasibility, robustness, robustness_bisection, zhu_check
from jewel.linalg import SIGMA_X, SIGMA_Y, random_hermitian, random_isometry
from jewel.povm import MeasurementSet, NoiseModel
from jewel.sdp import Status
from jewel.spectra import FreeTuple
from jewel.witness import Verdict, WitnessCandidate

from conftest import SOLVES

I2 = np.eye(2)
GRID = [(2, 2, (2, 2)), (2, 2, (3, 3)), (3, 2, (2, 2, 2)), (2, 3, (3, 3))]


def mu_closed(lam, d):
    return ((d - 2) * (1 - lam) + 2 * np.sqrt((1 - d) * lam ** 2 + (d - 2) * lam + 1)) / d


def grid_margins(point):
    """Smallest feasibility margin over 20 seeded sets per grid entry, noised at ``point(g, d, k)``."""
    worst = np.inf
    for seed, (g, d, k) in enumerate(GRID):
        rng = np.random.default_rng(400 + seed)
        s = point(g, d, k)
        for _ in range(20):
            mset = pv.apply_noise(pv.random_set(d, k, rng), NoiseModel("balanced", s))
            worst = min(worst, joint_feasibility(mset).margin)
    return worst


def test_ac01_mub_pair_qubit(acceptance):
    mset = pv.mub_povms(2, 2)
    start = time.perf_counter()
    t = robustness(mset).t
    elapsed = time.perf_counter() - start
    ok = abs(t - 0.707107) <= 1e-4 and elapsed < 5
    acceptance(1, ok, f"MUB pair d=2 robustness t*={t:.7f} in {elapsed:.2f}s")
    assert ok


def test_ac02_mub_pair_asymmetric(acceptance):
    d = 3
    mset = pv.mub_povms(d, 2)
    worst = 0.0
    for lam in (0.2, 0.5, 0.8):
        # the (lam, 1) ray meets the boundary at s = t*(lam, 1)
        s = robustness(mset, direction=(lam, 1.0)).t * np.array([lam, 1.0])
        worst = max(worst, abs(s[1] - mu_closed(s[0], d)))
        # and the boundary point (lam, mu(lam)) itself has t* = 1
        a = np.array([lam, mu_closed(lam, d)])
        worst = max(worst, abs(robustness(mset, direction=a).t - 1.0))
    ok = worst <= 1e-3
    acceptance(2, ok, f"MUB pair d=3 asymmetric boundary, max deviation {worst:.2e}")
    assert ok


def test_ac03_zhu_mub3(acceptance):
    z = zhu_check(pv.mub_povms(3, 2))
    ok = abs(z.value - 4.0) <= 1e-5 and z.incompatible_certified
    acceptance(3, ok, f"Zhu value on MUB pair d=3: {z.value:.8f}, certified={z.incompatible_certified}")
    assert ok


def test_ac04_cloning_point(acceptance):
    worst = grid_margins(lambda g, d, k: (bd.cloning_symmetric(g, d, k),) * g)
    ok = worst >= -1e-7
    acceptance(4, ok, f"cloning point feasible on 80 sets, min margin {worst:.3e}")
    assert ok


def test_ac05_symmetrization_point(acceptance):
    worst = grid_margins(lambda g, d, k: bd.symmetrization_point(d, k))
    ok = worst >= -1e-7
    acceptance(5, ok, f"symmetrization point feasible on 80 sets, min margin {worst:.3e}")
    assert ok


def test_ac06_diamond_point(acceptance):
    def point(g, d, k):
        s = bd.diamond_qc_point(k)
        m = sum(x - 1 for x in k)
        assert np.allclose(s, [1 / ((x - 1) ** 2 * np.sqrt(m)) for x in k])
        return s

    worst = grid_margins(point)
    ok = worst >= -1e-7
    acceptance(6, ok, f"diamond-scaled point feasible on 80 sets, min margin {worst:.3e}")
    assert ok


def test_ac07_trine(acceptance):
    mset = pv.planar_qubit_set(3, 1.0)
    t = robustness(mset).t
    ref = robustness_bisection(mset, tol=1e-7)
    ok = 0.6660 <= t <= 2 / 3 + 1e-3 and 0.6660 <= ref <= 2 / 3 + 1e-3 and abs(t - ref) <= 1e-5
    acceptance(7, ok, f"trine robustness {t:.7f}, bisection {ref:.7f}, bound {2 / 3:.7f}")
    assert ok


def test_ac08_witness_certification(acceptance):
    W = wt.planar_witness(2)
    pair = MeasurementSet((pv.Povm(np.array([(I2 + SIGMA_Y) / 2, (I2 - SIGMA_Y) / 2])),
                           pv.Povm(np.array([(I2 - SIGMA_X) / 2, (I2 + SIGMA_X) / 2]))))
    a = wt.apply_witness(W, pair)
    rng = np.random.default_rng(8)
    trials = false_positive = 0
    while trials < 200:
        d = int(rng.integers(2, 4))
        s = float(rng.uniform(0.3, 1.0))
        mset = pv.apply_noise(pv.random_set(d, (2, 2), rng), NoiseModel("balanced", (s, s)))
        if not joint_feasibility(mset).compatible:
            continue
        trials += 1
        false_positive += wt.apply_witness(W, mset).certified_incompatible
    ok = abs(a.max_eig - np.sqrt(2)) <= 1e-9 and a.certified_incompatible and false_positive == 0
    acceptance(8, ok, f"planar witness max_eig={a.max_eig:.12f}; "
                      f"{false_positive} false positives on {trials} compatible sets")
    assert ok


def test_ac09_classification_consistency(acceptance):
    rng = np.random.default_rng(9)
    contradictions = 0
    for _ in range(200):
        g, n = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        X = WitnessCandidate((2,) * g, np.array([random_hermitian(n, rng) for _ in range(g)]))
        X = X.scaled(float(rng.uniform(0.5, 1.5)) / (1 - wt.exact_slack(X)))
        c = wt.classify(X, theta=1 / np.sqrt(g))
        exact = wt.is_witness_exact(X)
        if c.verdict is Verdict.WITNESS and not wt.is_witness_exact(X, tol=1e-5):
            contradictions += 1
        if c.verdict is Verdict.NOT_WITNESS and exact:
            contradictions += 1
    gap = wt.binary([SIGMA_X, SIGMA_Y]).scaled(0.7)
    c = wt.classify(gap)
    gap_ok = wt.is_witness_exact(gap) and c.verdict is Verdict.INDETERMINATE and abs(c.rho - 0.714) <= 1e-3
    ok = contradictions == 0 and gap_ok
    acceptance(9, ok, f"{contradictions} contradictions in 200 candidates; gap example rho={c.rho:.6f} "
                      f"{c.verdict.value}")
    assert ok


def test_ac10_jewel_geometry(acceptance):
    vertices = sp.jewel_vertices(3).tolist() == [[-1.5, 0.0], [0.0, -1.5], [1.5, 1.5]]
    diamond = sp.jewel_tuple((2, 2)).equals(sp.diamond(2))
    rng = np.random.default_rng(10)
    disagree = 0
    for _ in range(100):
        shape = tuple(int(k) for k in rng.integers(2, 4, size=rng.integers(1, 4)))
        n = int(rng.integers(1, 4))
        X = np.array([random_hermitian(n, rng) for _ in range(sum(k - 1 for k in shape))])
        X *= rng.uniform(0.05, 0.6)
        T = sp.jewel_tuple(shape)
        G, _ = np.linalg.qr(rng.standard_normal((T.dimD,) * 2) + 1j * rng.standard_normal((T.dimD,) * 2))
        generic = sp.membership(FreeTuple(G @ T.matrices @ G.conj().T), X)
        fast = sp.jewel_membership(shape, X)
        disagree += fast.member != generic.member or abs(fast.slack - generic.slack) > 1e-9
    ok = vertices and diamond and disagree == 0
    acceptance(10, ok, f"jewel vertices {vertices}, diamond {diamond}, {disagree}/100 membership mismatches")
    assert ok


def test_ac11_solver_hygiene(acceptance):
    rng = np.random.default_rng(11)
    worst_diff = 0.0
    for _ in range(20):
        shape = ((2, 2), (2, 3), (3, 3))[int(rng.integers(3))]
        mset = pv.random_set(int(rng.integers(2, 4)), shape, rng)
        a = rng.uniform(0.2, 1.0, size=len(shape))
        worst_diff = max(worst_diff, abs(robustness(mset, direction=a).t
                                         - robustness_bisection(mset, direction=a, tol=1e-7)))
    optimal = [s for s in SOLVES if s[0] is Status.OPTIMAL]
    worst_gap = max(abs(s[1]) for s in optimal)
    worst_res = max(max(s[2], s[3]) for s in optimal)
    ok = worst_gap <= 1e-7 and worst_res <= 1e-7 and worst_diff <= 1e-5
    acceptance(11, ok, f"{len(optimal)} optimal solves: max gap {worst_gap:.1e}, max residual "
                       f"{worst_res:.1e}; direct vs bisection max diff {worst_diff:.1e}")
    assert ok


def test_ac12_structural(acceptance):
    rng = np.random.default_rng(12)
    coarse = pad = compress = 0
    pad_diff = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        mset = pv.random_set(d, (3, 2), rng)
        s = robustness(mset).t * 0.98
        noisy = pv.apply_noise(mset, NoiseModel("balanced", (s, s)))
        merged = noisy.replace(0, pv.coarse_grain(noisy[0], [[0, 1], [2]]))
        coarse += joint_feasibility(noisy).compatible and joint_feasibility(merged).compatible
    for _ in range(10):
        mset = pv.random_set(int(rng.integers(2, 4)), (2, 2), rng)
        padded = mset.replace(1, pv.pad_outcomes(mset[1], 3))
        pad_diff = max(pad_diff, abs(robustness(padded, "linear").t - robustness(mset, "linear").t))
        pad += 1
    for _ in range(10):
        mset = pv.random_set(3, (2, 3), rng)
        s = robustness(mset).t * 0.98
        noisy = pv.apply_noise(mset, NoiseModel("balanced", (s, s)))
        V = random_isometry(3, int(rng.integers(1, 3)), rng)
        compress += joint_feasibility(noisy).compatible and joint_feasibility(pv.compress(noisy, V)).compatible
    ok = coarse == 20 and pad_diff <= 1e-5 and compress == 10
    acceptance(12, ok, f"coarse-graining {coarse}/20, padding max diff {pad_diff:.1e} over {pad}, "
                       f"compression {compress}/10")
    assert ok


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
def test_closed_form_mu_matches_bounds_module(lam):
    assert bd.mub_pair_mu(lam, 3) == pytest.approx(mu_closed(lam, 3), abs=1e-12)
