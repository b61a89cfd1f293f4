import numpy as np
import pytest

from morselab import oracles
from morselab.spectrum import (analyze, char_fn, circle_path, compute_nstar,
                               count_unstable_roots, linearize, winding_number)
from morselab.system import CyclicSystemSpec, tanh_feedback

# lambda + 1 = -4 exp(-lambda): W(-4e) - 1, evaluated in 30-digit arithmetic
MAIN_ROOT = complex(0.4343332873650468, 2.1575117658854864)
# lambda + 1 = 0.1 exp(-lambda): W(0.1e) - 1
POSITIVE_GAMMA_ROOT = -0.7815207694300065


@pytest.mark.parametrize("gamma,expected", [(-1.0, 0), (-2.0, 2), (-8.0, 4)])
def test_golden_counts(gamma, expected):
    m, nonhyp, meta = count_unstable_roots([0.0], [gamma], 1.0)
    assert (m, nonhyp) == (expected, False)
    assert oracles.lambertw_unstable_count(0.0, gamma, 1.0) == expected
    assert oracles.seeded_unstable_count([0.0], [gamma], 1.0, (1e-6, 12, -12, 12)) == expected


def test_main_system_report(main_system, main_kernel):
    rep = analyze(main_system, main_kernel)
    assert rep.m_star == 2 and rep.n_star == 2 and not rep.nonhyperbolic
    assert rep.problems == []
    top = rep.roots[0]
    assert abs(top.real - MAIN_ROOT.real) < 1e-9 and abs(abs(top.imag) - MAIN_ROOT.imag) < 1e-9


def test_positive_gamma_leading_root():
    roots = oracles.lambertw_roots(-1.0, 0.1, 1.0)
    lead = max(roots, key=lambda z: z.real)
    assert lead.real == pytest.approx(POSITIVE_GAMMA_ROOT, abs=1e-10)
    assert count_unstable_roots([-1.0], [0.1], 1.0)[0] == 0


def test_hopf_point_is_nonhyperbolic():
    m, nonhyp, _ = count_unstable_roots([0.0], [-np.pi / 2], 1.0)
    assert nonhyp and m == 0
    assert compute_nstar(m, nonhyp, -1) == 1


def test_finite_difference_linearization(main_system, main_kernel):
    mu, gamma, tau0 = linearize(main_system, main_kernel)
    mu2, gamma2, _ = linearize(main_system, main_kernel, finite_differences=True)
    assert np.allclose(mu, mu2, atol=1e-8) and np.allclose(gamma, gamma2, atol=1e-7)
    assert tau0 == 1.0


def test_cyclic_three_component_count():
    # product of gammas = -(1.5*1)^2 * 1.5... checked against the Newton scan
    fs = (tanh_feedback(1.5), tanh_feedback(1.5), tanh_feedback(-1.5))
    system = CyclicSystemSpec(fs, -1, 2.0)
    mu, gamma = system.derivatives_at_origin()
    m, nonhyp, meta = count_unstable_roots(mu, gamma, 1.0)
    B = meta["modulus_bound"]
    assert m == oracles.seeded_unstable_count(mu, gamma, 1.0, (1e-6, B, -B, B))


def test_winding_on_circle_matches_roots():
    coeffs = [1, -0.5, 0, 1]
    inside, _ = winding_number(lambda z: np.polyval(coeffs, z), circle_path())
    assert 3 - inside == oracles.polynomial_roots_outside(coeffs)


def test_char_fn_vanishes_at_root():
    assert abs(char_fn(MAIN_ROOT, [-1.0], [-4.0], 1.0)) < 1e-12


@pytest.mark.parametrize("delta,m,nonhyp,expected", [
    (1, 3, True, 4), (1, 2, True, 2), (1, 3, False, 3),
    (-1, 2, True, 3), (-1, 3, True, 3), (-1, 2, False, 2)])
def test_nstar_cases(delta, m, nonhyp, expected):
    assert compute_nstar(m, nonhyp, delta) == expected
