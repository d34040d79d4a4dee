import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchmem.depol import RateParams
from switchmem.dynamics import DynamicsProfile, cyclic_profile
from switchmem.errors import BranchError, InvalidParameterError
from switchmem.measures import (
    asymptotic_bound_check,
    best_configuration,
    bisect,
    blp_memory,
    characteristic_eta,
    full_switch_profile,
    measure,
    normalize,
    partition_measures,
    rhp_memory,
    rhp_unequal,
)

GAMMA = 2.0


def unit_interval_root(coeffs):
    r = np.roots(coeffs)
    r = r[np.isreal(r)].real
    r = r[(r > 0) & (r < 1)]
    assert r.size == 1
    return float(r[0])


def test_bisect_and_normalize():
    assert bisect(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        bisect(lambda x: x * x + 1, 0, 1)
    assert normalize(math.inf) == 1.0
    assert normalize(1.0) == 0.5


@pytest.mark.parametrize("n,numerator", [
    (2, [3, 6, -1]),
    (3, [-3, -6, -12, 2, 1]),
    (4, [-3, -6, -9, -20, 3, 2, 1]),
])
def test_eta_star_is_numerator_root(n, numerator):
    root = characteristic_eta(cyclic_profile(n), GAMMA)
    assert not root.pole and root.sign_changes == 1
    assert root.eta == pytest.approx(unit_interval_root(numerator), abs=1e-11)


def test_two_switch_exact_values():
    r = measure(cyclic_profile(2), GAMMA)
    eta = 2 / math.sqrt(3) - 1
    assert r.eta_star == pytest.approx(eta, abs=1e-11)
    expected = 1.5 * (math.log(0.2) - math.log(eta))  # C(eta*) = eta* for n = 2
    assert r.memory == pytest.approx(expected, abs=1e-10)
    assert r.normalized == pytest.approx(expected / (1 + expected))
    assert r.quadrature == pytest.approx(r.memory, abs=1e-6)


@pytest.mark.parametrize("n", [3, 5, 8, 15])
def test_quadrature_matches_log_ratio(n):
    r = measure(cyclic_profile(n), GAMMA)
    assert abs(r.quadrature - r.memory) <= 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.1, max_value=20), st.integers(min_value=2, max_value=8))
def test_t_minus_scales_inversely_with_gamma(gamma, n):
    a = measure(cyclic_profile(n), gamma, check=False)
    b = measure(cyclic_profile(n), 2 * gamma, check=False)
    assert a.eta_star == pytest.approx(b.eta_star, abs=1e-11)
    assert b.t_minus == pytest.approx(a.t_minus / 2, rel=1e-9)
    assert a.normalized == pytest.approx(b.normalized, abs=1e-12)


def test_normalized_increases_with_n():
    vals = [measure(cyclic_profile(n), GAMMA, check=False).normalized for n in range(2, 16)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_markovian_profile_gives_zero():
    flat = DynamicsProfile("numeric", lambda e: np.full_like(e, -1 / 3), "flat")
    root = characteristic_eta(flat, GAMMA)
    assert root.markovian
    r = rhp_memory(flat, root, GAMMA)
    assert (r.memory, r.normalized, r.t_minus) == (0.0, 0.0, None)


def test_negative_coherence_is_a_branch_error():
    prof = DynamicsProfile("numeric", lambda e: -((e - 0.5) ** 2) - 0.1, "negative")
    root = characteristic_eta(prof, GAMMA)
    assert root.eta == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(BranchError):
        rhp_memory(prof, root, GAMMA)


def test_full_switch_pole():
    prof = full_switch_profile()
    root = characteristic_eta(prof, GAMMA)
    assert root.pole
    assert abs(root.eta - 2 / 3) <= 1e-12
    r = rhp_memory(prof, root, GAMMA)
    assert r.memory == math.inf and r.normalized == 1.0 and r.pole_flag
    assert r.t_minus == pytest.approx(-math.log(2 / 3) / (4 * GAMMA))


def test_blp_values():
    prof = full_switch_profile()
    b = blp_memory(prof, characteristic_eta(prof, GAMMA).eta)
    assert b.m_blp == pytest.approx(1 / 3, abs=1e-9)
    assert b.normalized == pytest.approx(0.25, abs=1e-9)
    cyc = cyclic_profile(3)
    b3 = blp_memory(cyc, characteristic_eta(cyc, GAMMA).eta)
    assert b3.c0 == pytest.approx(1 / 3)
    assert 0 <= b3.m_blp <= b3.c0 / 2
    same = blp_memory(cyc, 0.0)
    assert same.m_blp == 0.0


def test_bound_check():
    chk = asymptotic_bound_check(GAMMA)
    assert chk.decreasing
    assert chk.bound == chk.terms[15]
    assert chk.normalized == pytest.approx(chk.bound / (1 + chk.bound))


def test_best_configuration_reduces_to_cyclic():
    for n in (3, 4):
        best = best_configuration(n, n, GAMMA)
        ref = measure(cyclic_profile(n), GAMMA, check=False)
        assert best.partition == (1,) * n and best.post == "+"
        assert abs(best.memory - ref.memory) <= 1e-12


def test_partition_measures_cover_outcomes():
    res = partition_measures(4, 2, GAMMA)
    assert [(r.partition, r.post) for r in res] == [((3, 1), "+"), ((3, 1), "F1"), ((2, 2), "+"), ((2, 2), "F1")]
    # the equal split behaves like the two-switch on composite channels
    assert res[2].memory == pytest.approx(measure(cyclic_profile(2), GAMMA).memory, abs=1e-9)
    assert all(r.markovian for r in res if r.post != "+")
    with pytest.raises(InvalidParameterError):
        partition_measures(4, 2, GAMMA, "sideways")


def test_unequal_equal_rates_reduce_to_two_switch():
    u = rhp_unequal(RateParams.equal(GAMMA))
    ref = measure(cyclic_profile(2), GAMMA).memory
    assert u.negative_region
    assert abs(u.value - ref) <= 1e-6
    assert abs(u.log_check - u.value) <= 1e-6
    assert u.t_max == pytest.approx(10.0)


def test_unequal_positive_and_identity():
    u = rhp_unequal(RateParams(1, 2, 3))
    assert u.negative_region and u.value > 0
    assert abs(u.log_check - u.value) <= 1e-6
    z = rhp_unequal(RateParams(0, 0, 0))
    assert z.value == 0 and not z.negative_region
