import numpy as np
import pytest

from morselab.system import CyclicSystemSpec, Nonlinearity, SpecError, linear, tanh_feedback


def test_main_nonlinearity_values(main_system):
    f = main_system.nonlinearities[0]
    assert float(f(0.3, -0.2)) == pytest.approx(-0.3 - 2 * np.tanh(-0.4))
    mu, gamma = main_system.derivatives_at_origin()
    assert mu[0] == -1.0 and gamma[0] == -4.0


def test_derivatives_match_central_differences():
    f = Nonlinearity("general", {"a": -0.7, "e": -0.2, "b": 0.1, "g": 1.3, "c": 0.8})
    e = 1e-6
    for u, v in [(0.0, 0.0), (0.4, -1.1), (-1.2, 0.5)]:
        assert float(f.d1(u, v)) == pytest.approx((f(u + e, v) - f(u - e, v)) / (2 * e), abs=1e-7)
        assert float(f.d2(u, v)) == pytest.approx((f(u, v + e) - f(u, v - e)) / (2 * e), abs=1e-7)


def test_main_system_passes_checks(main_system):
    assert main_system.check() == []
    # L0 is the exact max of |f| over [-M, M]^2
    g = np.linspace(-2, 2, 801)
    U, V = np.meshgrid(g, g)
    assert main_system.L0 == pytest.approx(np.max(np.abs(main_system.nonlinearities[0](U, V))), rel=1e-6)


def test_wrong_feedback_sign_is_reported():
    spec = CyclicSystemSpec((tanh_feedback(2.0, 2.0),), -1, 2.0)
    problems = spec.check()
    assert any("feedback" in p for p in problems)


def test_dissipativity_failure_is_reported():
    spec = CyclicSystemSpec((linear(0.5, -1.0),), -1, 2.0)
    assert any("not negative" in p for p in spec.check())


def test_invalid_construction():
    with pytest.raises(SpecError):
        CyclicSystemSpec((linear(-1, -1),), 0, 2.0)
    with pytest.raises(SpecError):
        CyclicSystemSpec((linear(-1, -1),), 1, -2.0)
    with pytest.raises(SpecError):
        Nonlinearity("polynomial", {})


def test_dict_roundtrip(main_system):
    again = CyclicSystemSpec.from_dict(main_system.to_dict())
    assert again == main_system
