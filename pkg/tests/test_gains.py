import math

import numpy as np
import pytest

from dfd.gains import (GainSet, check_gains, decay_rate, derived_constants, finite_time_bound,
                       minimal_gains, settling_time_bound)
from dfd.graph import graph_certificate

from test_graph import CYCLE4_LAMBDA1


def test_derived_constants_hand_examples():
    c = derived_constants(0.5, [1.0, 0.3], l=1.0, l1=0.0)
    assert (c.l2, c.gamma1, c.gamma0) == (1.0, 1.5, 11.0)
    assert c.gamma2 == pytest.approx(2 + 11 / 3, rel=1e-15)
    c = derived_constants(0.75, np.ones(4), l=3.0, l1=0.0)
    assert (c.l2, c.gamma1, c.gamma0) == (3.0, 1.75, 25.0)
    assert c.gamma2 == pytest.approx(2 + 25 / 3, rel=1e-15)


@pytest.mark.parametrize("rho", [0.01, 0.3, 0.5, 0.99])
def test_gamma1_with_unit_w(rho):
    assert derived_constants(rho, np.ones(3), 1.0).gamma1 == 1 + rho


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.2, 1.5])
def test_rho_out_of_range(rho):
    with pytest.raises(ValueError):
        derived_constants(rho, [1.0], 1.0)


def test_constants_monotone_in_rho():
    rhos = np.linspace(0.01, 0.99, 99)
    cs = [derived_constants(r, [1.0, 0.5], 1.0) for r in rhos]
    assert np.all(np.diff([c.gamma1 for c in cs]) > 0)
    assert np.all(np.diff([c.gamma0 for c in cs]) > 0)


def test_minimal_gains_k2_example():
    c = derived_constants(0.75, np.ones(4), l=3.0)
    g = minimal_gains(c, CYCLE4_LAMBDA1)
    assert g.k2 == 4.0
    assert g.k1 == pytest.approx(math.sqrt(54.5 / CYCLE4_LAMBDA1 * 4.0), rel=1e-14)


def test_minimal_gains_degenerate_warns():
    c = derived_constants(0.5, [1.0], l=0.0)
    with pytest.warns(RuntimeWarning, match="k2 > 0"):
        g = minimal_gains(c, 1.0)
    assert g.k2 == 0.0 and g.k1 == 0.0


def test_k1_bound_scales_with_lambda1():
    c = derived_constants(0.6, [1.0, 0.7], l=2.0, l1=0.5)
    a, b = minimal_gains(c, 0.3), minimal_gains(c, 0.6)
    assert b.k1 / a.k1 == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert a.k2 == b.k2


def test_minimal_gains_rejects_bad_lambda():
    with pytest.raises(ValueError):
        minimal_gains(derived_constants(0.5, [1.0], 1.0), 0.0)


def test_minimal_gains_pass_check(rng):
    for _ in range(200):
        c = derived_constants(float(rng.uniform(0.01, 0.99)), rng.uniform(0.1, 1.0, 5),
                              float(rng.uniform(0.1, 5)), float(rng.uniform(0, 2)))
        lam = float(rng.uniform(0.01, 3))
        g = minimal_gains(c, lam)
        r = check_gains(g.k1, g.k2, c, lam)
        assert r.certified
        assert r.k1_margin == pytest.approx(0.0, abs=1e-12 * g.k1)
        assert r.k2_margin == pytest.approx(0.0, abs=1e-12 * g.k2)


def test_scenario_gains_on_surrogate(cycle4):
    cert = graph_certificate(cycle4)
    c = derived_constants(0.75, cert.w, l=3.0)
    r = check_gains(5.0, 4.0, c, cert.lambda1)
    # k1 bound = sqrt(54.5 * 4 / lambda1) ~ 38.7 on the surrogate
    assert r.k2_ok and not r.k1_ok and not r.certified
    assert r.k1_min == pytest.approx(math.sqrt(218 / CYCLE4_LAMBDA1), rel=1e-12)
    assert r.to_dict()["status"] == "uncertified but simulable"


def test_huge_k1_certifies():
    c = derived_constants(0.75, [1.0, 1.0], l=3.0)
    k2 = minimal_gains(c, 0.1).k2
    assert check_gains(1e6, k2, c, 0.1).certified


def test_check_gains_rejects_nonpositive():
    c = derived_constants(0.75, [1.0], l=3.0)
    with pytest.raises(ValueError):
        check_gains(0.0, 4.0, c, 1.0)
    with pytest.raises(ValueError):
        check_gains(5.0, -1.0, c, 1.0)


def test_settling_time_bound():
    assert settling_time_bound(0.0, 2.0, 5.0) == 0.0
    assert settling_time_bound(1.0, 1.0, 1.0) == 3.0
    base = settling_time_bound(0.7, 0.4, 3.0)
    assert settling_time_bound(1.4, 0.4, 3.0) == pytest.approx(2 * base, rel=1e-15)
    assert settling_time_bound(0.7, 0.8, 3.0) == pytest.approx(base / 2, rel=1e-15)
    with pytest.raises(ValueError):
        settling_time_bound(1.0, 0.0, 1.0)


def test_finite_time_bound_matches_exact_solution():
    # dV/dt = -c V^(2/3) hits zero at 3 V0^(1/3) / c
    V0, c = 2.7, 0.9
    assert finite_time_bound(V0, c, 2 / 3) == pytest.approx(3 * V0 ** (1 / 3) / c, rel=1e-14)
    # both bound forms coincide at V0 = 1
    g = GainSet(k1=2.0, k2=1.0, rho=0.5, l=0.5, l1=0.0, l2=0.5, gamma0=11, gamma1=1.5, gamma2=17 / 3)
    assert finite_time_bound(1.0, decay_rate(g), 2 / 3) == pytest.approx(
        settling_time_bound(1.0, g.k, g.gamma2), rel=1e-14)
