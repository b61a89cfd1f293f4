import numpy as np
import pytest
from hypothesis import given, strategies as st

from morselab import oracles
from morselab.delay import (DelayError, DelayKernel, constant_kernel,
                            kernel_integral, plateau_kernel, quadratic_kernel,
                            solve_threshold_delay)
from morselab.segment import constant_segment, from_function, make_segment

CUBIC_TAU = 0.8177316738868235  # tau + tau^3/3 = 1, independent high-precision root


@pytest.mark.parametrize("alpha0", [1.0, 1.1, 2.0, 5.0])
def test_constant_kernel_gives_reciprocal(alpha0):
    seg = constant_segment(-0.7, 0, 1.0)
    assert solve_threshold_delay(seg, constant_kernel(alpha0, r=1.0)) == pytest.approx(1 / alpha0, abs=1e-10)


def test_cubic_threshold_against_bisection_oracle():
    k = quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0)
    seg = from_function(lambda s: s, lambda s: np.ones_like(s), nodes=11)
    tau = solve_threshold_delay(seg, k)
    assert abs(tau - oracles.cubic_threshold_tau()) < 1e-8
    assert abs(tau - CUBIC_TAU) < 1e-8


def test_kernel_integral_matches_closed_form():
    k = quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0)
    seg = from_function(lambda s: s, lambda s: np.ones_like(s), nodes=7)
    for tau in (0.1, 0.37, 0.9, 1.0):
        assert kernel_integral(seg, k, tau) == pytest.approx(tau + tau ** 3 / 3, abs=1e-14)


def test_root_on_a_grid_node():
    # alpha clamps to 2 everywhere, so tau = 1/2 = 3h lands exactly on a node
    k = quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0)
    seg = constant_segment(5.0, 0, 1.0, nodes=7)
    assert solve_threshold_delay(seg, k) == pytest.approx(0.5, abs=1e-12)


def test_plateau_profile():
    k = plateau_kernel()
    assert k.alpha(0.0) == 1.0 and k.alpha(0.049) == 1.0
    assert 1.0 < k.alpha(0.3) < 1.2
    assert k.alpha(100.0) == pytest.approx(1.2)
    assert k.check() == []
    assert k.tau0 == 1.0


def test_kernel_validation():
    with pytest.raises(DelayError):
        DelayKernel("cosine", 1, 1, 2)
    with pytest.raises(DelayError):
        DelayKernel("constant", 1, 2, 1)
    bad = DelayKernel("plateau", 1.0, 1.0, 1.2, eps_plateau=0.0)
    assert any("plateau" in p for p in bad.check())


def test_rates_are_clamped_to_declared_bounds():
    # a constant rate of 3 is clamped to alpha2 = 1.2, so tau = 1/1.2
    k = DelayKernel("constant", 3.0, 1.0, 1.2)
    assert solve_threshold_delay(constant_segment(0.1), k) == pytest.approx(1 / 1.2, abs=1e-12)
    slow = DelayKernel("constant", 0.5, 1.0, 1.2)
    assert solve_threshold_delay(constant_segment(0.1), slow) == pytest.approx(1.0, abs=1e-12)


def test_kernel_dict_roundtrip():
    k = plateau_kernel(eps=0.1)
    assert DelayKernel.from_dict(k.to_dict()) == k
    assert DelayKernel.from_dict({"kind": "constant", "alpha0": 2.0, "alpha2": 2.0, "r": 1.0}).alpha1 == 1.0


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=40),
       st.lists(st.floats(-10, 10), min_size=40, max_size=40),
       st.sampled_from(["plateau", "quadratic"]))
def test_delay_bounds_and_threshold(vals, slopes, kind):
    vals = np.array(vals)
    seg = make_segment(vals, np.array(slopes[:len(vals)]))
    k = plateau_kernel() if kind == "plateau" else quadratic_kernel()
    tau = solve_threshold_delay(seg, k)
    assert 1 / k.alpha2 - 1e-12 <= tau <= k.r + 1e-12
    assert kernel_integral(seg, k, tau) == pytest.approx(1.0, abs=1e-10)
