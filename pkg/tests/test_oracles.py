import itertools

import numpy as np
import pytest

from morselab import oracles


def test_brute_force_small_cases():
    assert oracles.brute_force_sign_changes([1, -1, 1]) == 2
    assert oracles.brute_force_sign_changes([1, 0, -1]) == 1
    assert oracles.brute_force_sign_changes([0, 0]) == 0
    assert oracles.brute_force_sign_changes([2, 1, 3]) == 0


def test_brute_force_agrees_with_run_count_on_nonzero_sequences():
    for seq in itertools.product([-1, 1], repeat=8):
        runs = sum(1 for a, b in zip(seq, seq[1:]) if a != b)
        assert oracles.brute_force_sign_changes(seq) == runs


def test_cubic_root():
    t = oracles.cubic_threshold_tau()
    assert t + t ** 3 / 3 == pytest.approx(1.0, abs=1e-15)


def test_lambertw_roots_solve_the_equation():
    for z in oracles.lambertw_roots(-1.0, -4.0, 1.0):
        assert abs(z + 1 + 4 * np.exp(-z)) < 1e-9 * max(1, abs(z))
