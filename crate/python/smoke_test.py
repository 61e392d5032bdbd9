"""Smoke test for the Python extension.

Build with
    cargo build --release -p overhauser-py --features extension-module
and put the library on the path as `overhauser.so`, or run this script
with OVERHAUSER_LIB pointing at the built shared library.
"""

import importlib.machinery
import importlib.util
import os
import sys


def load():
    path = os.environ.get("OVERHAUSER_LIB")
    if not path:
        import overhauser

        return overhauser
    loader = importlib.machinery.ExtensionFileLoader("overhauser", path)
    spec = importlib.util.spec_from_loader("overhauser", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    ov = load()

    tau = [i * 2.0 for i in range(101)]
    env = ov.run_ramsey(tau, bath=ov.Bath(2.9), shots=2000, seed=3)
    assert len(env) == 101 and env.shots == 2000
    fit = env.fit("gaussian")
    assert abs(fit.time_constant - 77.6) / 77.6 < 0.1, fit
    assert abs(env.fft_sigma() - 2.9) < 0.3

    q, f_pi = ov.metrics(73.0, 130.0)
    assert abs(q - 18.98) < 0.01 and abs(f_pi - 0.9745) < 5e-4

    n, a_c, m = ov.estimate_bath(3.9, 0.355)
    assert 7e4 < n < 2.8e5 and a_c > 0 and m > 0

    assert abs(ov.averaged_chevron(50.0, 3.0, 8.9, 0.0, 0.0) - ov.rabi_lineshape(50.0, 3.0, 8.9)) < 1e-15

    cooled = ov.run_protocol("qsc", rounds=20, trajectories=200, seed=5)
    assert cooled.final_sigma < 1.0, cooled.final_sigma

    files, _ = ov.run_config("fig1e")
    assert files["envelope.csv"].startswith("sweep,top,bottom,visibility,shots\n")
    assert "summary.csv" in files

    try:
        ov.run_config('experiment = "unknown"')
    except ValueError as e:
        assert "detuned_ramsey" in str(e)
    else:
        raise AssertionError("unknown experiment accepted")

    assert len(ov.presets()) == 13
    print("python smoke test ok")


if __name__ == "__main__":
    sys.exit(main())
