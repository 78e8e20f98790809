"""Smoke test for the Python bindings.

Build first with `cargo build -p boussinesq-py` (add `--release` if preferred); the script
loads the resulting shared library directly, so no packaging tool is needed.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libboussinesq_py.so"
        if lib.exists():
            break
    else:
        sys.exit("libboussinesq_py.so not found; run `cargo build -p boussinesq-py` first")
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / "boussinesq_py.so"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("boussinesq_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def bump(t, center, half):
    s = (t - center) / half
    return math.exp(-20 * s * s / (1 - s * s)) if abs(s) < 1 else 0.0


def main():
    bq = load()

    # Free flow keeps a zero state at zero and is time reversible.
    nx, half_width = 128, 16.0
    dx = 2 * half_width / nx
    xs = [-half_width + j * dx for j in range(nx)]
    f = [math.exp(-x * x) for x in xs]
    zero = [0.0] * nx
    there = bq.free_propagate(half_width, f, zero, 0.3)
    assert max(abs(v) for v in bq.free_propagate(half_width, zero, zero, 0.3)) == 0.0
    assert any(abs(a - b) > 1e-3 for a, b in zip(there, f))

    # Linear boundary solution against the contour oracle.
    nt, t_max = 129, 3.0
    dt = t_max / (nt - 1)
    h1 = [bump(n * dt, 1.0, 0.5) for n in range(nt)]
    h2 = [0.0] * nt
    field = bq.boundary_evolution(half_width, nx, t_max, h1, h2)
    j = nx // 2 + 8
    exact = bq.mellin_oracle(dt, h1, h2, xs[j], 64 * dt)
    assert abs(field[64][j] - exact) < 1e-6, (field[64][j], exact)

    # Nonlinear solve with small Gaussian data.
    t_max, nt = 1.0, 65
    f_half = [0.1 * math.exp(-((i * dx - 4.0) ** 2)) for i in range(nx // 2)]
    out = bq.solve(half_width, nx, t_max, f_half, [0.0] * (nx // 2), [0.0] * nt, [0.0] * nt)
    assert out["diagnostics"]["fixed_point_residual"] < 1e-8
    assert len(out["u"]) == nt and len(out["u"][0]) == nx // 2

    # Error mapping.
    try:
        bq.solve(half_width, 100, t_max, [], [], [0.0] * nt, [0.0] * nt)
    except ValueError:
        pass
    else:
        raise AssertionError("bad grid accepted")

    value, argmax = bq.multiplier_supremum(0.0, 0.4, 0.49, 20.0, case="bc")
    assert value > 0 and argmax[0] > 0

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
