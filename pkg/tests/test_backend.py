"""The numba kernels and the pure-Python fallback must agree."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

PROBE = r"""
import json, numpy as np
from morselab import backend_name
from morselab.acceptance import main_system, main_kernel
from morselab.integrator import integrate, lyapunov_series
from morselab.segment import from_function
from morselab.delay import solve_threshold_delay
from morselab.difference import orbit, v_series, DiscreteSystemSpec
from morselab.system import Nonlinearity
seg = from_function(lambda s: 0.6*np.cos(7*s), lambda s: -4.2*np.sin(7*s))
tr = integrate(main_system(), main_kernel(), seg, 4.0, 1/400)
_, V, _ = lyapunov_series(tr, 40, 1.0)
spec = DiscreteSystemSpec(2, Nonlinearity("general", {"a": 0.5, "g": -1.0, "c": 1.0}), -1)
rows = orbit(spec, [0.3, -1.0, 2.0], 50)
print(json.dumps({"backend": backend_name(), "x": tr.states[::40, 0].tolist(),
                  "eta": tr.eta[::40].tolist(), "V": V.tolist(),
                  "tau": solve_threshold_delay(seg, main_kernel()),
                  "orbit": rows[:, 0].tolist(), "Vd": v_series(rows, -1).tolist()}))
"""


def probe(flag):
    env = dict(os.environ, MORSELAB_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True,
                         text=True, check=True, timeout=600)
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_numba_and_python_paths_agree():
    fast, slow = probe("1"), probe("0")
    assert slow["backend"] == "numpy" and fast["backend"] == "numba"
    assert np.allclose(fast["x"], slow["x"], rtol=0, atol=1e-12)
    assert np.allclose(fast["eta"], slow["eta"], rtol=0, atol=1e-12)
    assert abs(fast["tau"] - slow["tau"]) < 1e-14
    assert fast["V"] == slow["V"] and fast["Vd"] == slow["Vd"]
    assert np.allclose(fast["orbit"], slow["orbit"], rtol=0, atol=0)
