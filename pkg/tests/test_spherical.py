import math

import numpy as np
import pytest

from weylheat import rootsystem as rs
from weylheat import spherical as sp
from weylheat.errors import DegenerateInput, RankTooLarge


def a1_closed_form(lam, x):
    """Reference for rank 1: e^{l1 x1 + l2 x2} (1 - e^{-u})/u, u = gap product."""
    u = (lam[0] - lam[1]) * (x[0] - x[1])
    base = lam[0] * x[0] + lam[1] * x[1]
    if u == 0.0:
        return base
    return base + math.log(-math.expm1(-u)) - math.log(u)


def test_alt_sum_matches_a1_closed_form():
    rng = np.random.default_rng(0)
    for _ in range(50):
        lam = np.sort(rng.uniform(-1, 3, 2))[::-1]
        x = np.sort(rng.uniform(-1, 3, 2))[::-1]
        if (lam[0] - lam[1]) * (x[0] - x[1]) < 1e-6:
            continue
        res = sp.psi_alt_sum(lam, x)
        assert res.log_value == pytest.approx(a1_closed_form(lam, x), abs=1e-11)


def test_alt_sum_known_value():
    res = sp.psi_alt_sum([1.0, 0.0], [1.0, 0.0])
    assert res.value == pytest.approx(math.e - 1.0, rel=1e-13)
    assert res.method == "alt_sum"


def test_alt_sum_symmetry():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        lam = np.sort(rng.uniform(0, 2, n + 1))[::-1]
        x = np.sort(rng.uniform(0, 2, n + 1))[::-1]
        a = sp.psi_alt_sum(lam, x).log_value
        b = sp.psi_alt_sum(x, lam).log_value
        assert abs(a - b) < 1e-10


def test_alt_sum_rejects_degenerate_and_large_rank():
    with pytest.raises(DegenerateInput):
        sp.psi_alt_sum([1.0, 1.0], [2.0, 0.0])
    with pytest.raises(RankTooLarge):
        sp.psi_alt_sum(list(range(10, 0, -1)), list(range(10, 0, -1)))


def test_extended_precision_agrees_with_float():
    lam = [2.0, 0.7, 0.0]
    x = [1.5, 0.4, 0.0]
    a = sp.psi_alt_sum(lam, x, 53)
    b = sp.psi_alt_sum(lam, x, 200)
    assert abs(a.log_value - b.log_value) < 1e-12
    assert b.method == "alt_sum_extended"


def test_global_sandwich():
    rng = np.random.default_rng(2)
    for n in (1, 2, 3):
        for _ in range(100):
            lam = np.sort(rng.uniform(0, 4, n + 1))[::-1]
            x = np.sort(rng.uniform(0, 4, n + 1))[::-1]
            res = sp.psi_stable(lam, x, 1e-10)
            lower = rs.min_pairing_value(lam, x)
            upper = float(np.dot(lam, x))
            assert lower - 1e-9 <= res.log_value <= upper + 1e-9


def test_psi_stable_dispatch_bit_identical():
    lam = [1.3, 0.2]
    x = [2.0, -0.5]
    assert sp.psi_stable(lam, x).log_value == sp.psi_alt_sum(lam, x, 53).log_value


def test_psi_stable_tiny_gaps_match_reference():
    lam = [1e-4, 0.0]
    x = [1e-4, 0.0]
    res = sp.psi_stable(lam, x, 1e-12)
    ref = sp.psi_alt_sum(lam, x, 256)
    assert abs(res.log_value - ref.log_value) <= 1e-12 * (1 + abs(ref.log_value)) + 1e-15


def test_psi_stable_degenerate_matches_confluent_limit():
    # lam = (1,1,0) equals the eps -> 0 limit of lam = (1+eps,1,0)
    x = [2.0, 1.0, 0.0]
    res = sp.psi_stable([1.0, 1.0, 0.0], x, 1e-10)
    assert res.method == "iter_quadrature"
    vals = []
    for eps in (1e-2, 1e-3, 1e-4):
        vals.append(sp.psi_alt_sum([1.0 + eps, 1.0, 0.0], x, 256).log_value)
    # second-order Richardson through the three epsilons
    e = np.array([1e-2, 1e-3, 1e-4])
    coef = np.polyfit(e, vals, 2)
    limit = coef[-1]
    assert res.log_value == pytest.approx(limit, abs=5e-8)


def test_psi_normalization_confluent():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3):
        x = np.sort(rng.uniform(0, 3, n + 1))[::-1]
        res = sp.psi_stable(np.zeros(n + 1), x)
        assert abs(res.log_value) < 1e-12


def test_psi_stable_degenerate_above_quadrature_rank():
    # rank 4 has no chain quadrature; the confluent limit comes from an
    # eps-perturbed extrapolation of the extended-precision alternating sum
    lam = np.array([2.0, 1.0, 1.0, 0.5, 0.0])
    x = np.array([3.0, 2.2, 1.4, 0.7, 0.0])
    res = sp.psi_stable(lam, x, 1e-5)  # documented accuracy degradation here
    assert res.method == "alt_sum_extended"
    vals = []
    for eps in (1e-3, 1e-4, 1e-5):
        lam_eps = lam + eps * np.array([4.0, 3.0, 2.0, 1.0, 0.0])  # re-split the tie
        vals.append(sp.psi_alt_sum(lam_eps, x, 256).log_value)
    coef = np.polyfit([1e-3, 1e-4, 1e-5], vals, 2)
    assert res.log_value == pytest.approx(coef[-1], abs=1e-6)
    # an impossible target raises instead of silently degrading
    with pytest.raises(sp.ToleranceUnachievable):
        sp.psi_stable(lam, x, 1e-13)
    # the all-equal shortcut stays exact at any rank
    res0 = sp.psi_stable(np.full(5, 0.7), x)
    assert res0.method == "closed_form"
    assert res0.log_value == pytest.approx(0.7 * x.sum(), rel=1e-14)


def test_psi_constant_shift_exactness():
    # adding c to every lam coordinate multiplies psi by exp(c * sum x)
    lam = np.array([2.0, 1.0, 0.0])
    x = np.array([1.7, 0.6, -0.2])
    a = sp.psi_stable(lam, x).log_value
    b = sp.psi_stable(lam + 3.0, x).log_value
    assert b - a == pytest.approx(3.0 * x.sum(), rel=1e-12)


def test_iter_quadrature_base_case_and_cross_method():
    lam = [2.0, 1.0, 0.0]
    x = [3.0, 1.0, 0.0]
    it = sp.psi_iter_quadrature(lam, x, tol=1e-10)
    al = sp.psi_alt_sum(lam, x)
    assert abs(it.log_value - al.log_value) < 1e-8
    a1 = sp.psi_iter_quadrature([1.0, 0.0], [1.0, 0.0])
    assert a1.value == pytest.approx(math.e - 1.0, rel=1e-12)
    assert a1.method == "iter_quadrature"


def test_iter_quadrature_constant_lambda_volume_identity():
    # constant spectral vector reduces to the chain volume identity: psi = e^{c sum x}
    for n, x in [(1, [2.0, 0.5]), (2, [2.0, 1.0, 0.0]), (3, [3.0, 2.0, 0.7, 0.0])]:
        c = 0.8
        res = sp.psi_iter_quadrature([c] * (n + 1), x, tol=1e-11)
        assert res.log_value == pytest.approx(c * sum(x), abs=1e-10)


def test_iter_quadrature_requires_strict_x():
    with pytest.raises(DegenerateInput):
        sp.psi_iter_quadrature([2.0, 1.0, 0.0], [1.0, 1.0, 0.0])
    with pytest.raises(RankTooLarge):
        sp.psi_iter_quadrature([4, 3, 2, 1, 0], [4, 3, 2, 1, 0])


def test_mc_orbit_zero_variance_cases():
    res = sp.psi_mc_orbit([0.0, 0.0], [1.0, 0.0], 1000, seed=0)
    assert res.log_value == 0.0 and res.mc_std_error == 0.0
    res = sp.psi_mc_orbit([1.0, 0.0], [0.0, 0.0], 1000, seed=0)
    assert res.log_value == 0.0 and res.mc_std_error == 0.0


def test_mc_orbit_matches_closed_form():
    res = sp.psi_mc_orbit([1.0, 0.0], [1.0, 0.0], 400_000, seed=42)
    exact = math.log(math.e - 1.0)
    assert abs(res.log_value - exact) < 3.0 * res.mc_std_error + 1e-6


def test_mc_orbit_deterministic_given_seed():
    a = sp.psi_mc_orbit([1.0, 0.0], [1.5, 0.2], 50_000, seed=9)
    b = sp.psi_mc_orbit([1.0, 0.0], [1.5, 0.2], 50_000, seed=9)
    assert a.log_value == b.log_value


def test_envelope_values_and_symmetry():
    assert sp.psi_envelope([0.0, 0.0], [1.0, 0.0]) == 0.0
    assert sp.psi_envelope([1.0, 0.0], [1.0, 0.0]) == pytest.approx(1 - math.log(2))
    lam = [2.0, 0.5, 0.0]
    x = [1.0, 0.7, -0.3]
    assert sp.psi_envelope(lam, x) == pytest.approx(sp.psi_envelope(x, lam), rel=1e-14)


def test_a1_envelope_ratio_range():
    # exact rank-1 ratio (1+u)(1-e^{-u})/u stays in [1, sup], sup ~ 1.2980
    u = np.geomspace(1e-8, 1e8, 4001)
    ratio = (1 + u) * (-np.expm1(-u)) / u
    assert ratio.min() >= 1.0 - 1e-12
    assert ratio.max() <= 1.30


def test_phi_curved_composition():
    res = sp.phi_curved([1.0, 0.0], [1.0, 0.0])
    expect = math.log((math.e - 1.0) / math.sinh(1.0))
    assert res.log_value == pytest.approx(expect, abs=1e-12)
    with pytest.raises(DegenerateInput):
        sp.phi_curved([1.0, 0.0], [1.0, 1.0])


def test_phi_curved_prefactor_limit():
    # pi(X)/delta^{1/2}(X) -> 1 and phi -> 1 along X = eps * rho
    for eps in (1e-3, 1e-4):
        x = eps * rs.rho(2).array()
        res = sp.phi_curved(np.zeros(3), x)
        assert abs(res.log_value) < 1e-5


def test_phi_envelope_value():
    # rank 1, lam=(2,0), x=(1,0): e^{(lam-rho)(x)} (1+1)/(1+2) = 2e/3
    assert sp.phi_envelope([2.0, 0.0], [1.0, 0.0]) == pytest.approx(math.log(2 * math.e / 3))
    assert sp.phi_envelope(rs.rho(2).array(), [1e-12, 0.0, -1e-12]) == pytest.approx(0.0, abs=1e-9)


def test_phi_ratio_finite_on_samples():
    rng = np.random.default_rng(8)
    for _ in range(20):
        lam = np.sort(rng.uniform(0, 3, 3))[::-1]
        x = np.sort(rng.uniform(0.1, 3, 3))[::-1]
        if min(np.diff(lam[::-1])) < 1e-6 or min(np.diff(x[::-1])) < 1e-6:
            continue
        r = sp.phi_curved(lam, x).log_value - sp.phi_envelope(lam, x)
        assert math.isfinite(r)


def test_regime_classification():
    assert sp.regime_classify([0.0, 0.0], [5.0, 0.0]).label == "small"
    # rank 1: product 4 >= log 2, not small at default delta
    assert sp.regime_classify([2.0, 0.0], [2.0, 0.0]).label == "large"
    # mixed: one simple product large, the large-regime floor not met everywhere
    lab = sp.regime_classify([3.0, 0.0, -3.0], [3.0, 2.9, 0.0])
    assert lab.label == "mixed"


def test_large_regime_alternating_sum_bounds():
    rng = np.random.default_rng(13)
    for n in (1, 2, 3):
        w_order = rs.weyl_order(n)
        floor = math.sqrt(math.log(w_order))
        for _ in range(200):
            gl = floor * np.exp(rng.uniform(0, 1.5, n))
            gx = floor * np.exp(rng.uniform(0, 1.5, n))
            lam = np.concatenate([np.cumsum(gl[::-1])[::-1], [0.0]])
            x = np.concatenate([np.cumsum(gx[::-1])[::-1], [0.0]])
            logT, _err = sp._alt_sum_log_T_float(lam, x)
            assert math.log(0.5) - 1e-12 <= logT <= math.log(w_order) + 1e-12


def test_w_invariance_of_sorted_inputs():
    # permuting then re-sorting gives bit-identical input, hence identical output
    rng = np.random.default_rng(4)
    lam = np.sort(rng.uniform(0, 2, 3))[::-1]
    x = np.sort(rng.uniform(0, 2, 3))[::-1]
    shuffled = rng.permutation(lam)
    lam2 = np.sort(shuffled)[::-1]
    assert np.array_equal(lam, lam2)
    assert sp.psi_stable(lam, x).log_value == sp.psi_stable(lam2, x).log_value


def test_planned_precision_monotone_in_cancellation():
    bits = [
        sp.planned_precision([g, 0.0], [g, 0.0], 1e-10)
        for g in (1.0, 1e-2, 1e-3, 1e-4, 1e-5)
    ]
    assert bits == sorted(bits)
    assert bits[0] == 53 and bits[-1] > 64


def test_cross_oracle_triangle_rank2():
    lam = [1.4, 0.8, 0.0]
    x = [2.0, 0.9, 0.0]
    a = sp.psi_alt_sum(lam, x).log_value
    b = sp.psi_iter_quadrature(lam, x, tol=1e-9).log_value
    c = sp.psi_mc_orbit(lam, x, 300_000, seed=3)
    assert abs(a - b) < 1e-8
    assert abs(a - c.log_value) < 3 * c.mc_std_error + 1e-6
