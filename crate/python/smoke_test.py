#!/usr/bin/env python3
"""Smoke test for the Python extension module.

Builds nothing itself: it locates the compiled cdylib under target/ (debug or
release), exposes it under the importable name, and drives a few end-to-end
checks: a constrained flow, the chart solve on the unit sphere, an exponent
fit, and a blow-up sweep.

Usage:
    cargo build -p loja-lab-py            # or --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libloja_lab_py.so", "libloja_lab_py.dylib", "loja_lab_py.dll")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit(
        "compiled extension not found; run `cargo build -p loja-lab-py` first"
    )


def import_module():
    cdylib = locate_cdylib()
    stage = Path(tempfile.mkdtemp(prefix="loja_lab_py_"))
    suffix = ".pyd" if cdylib.suffix == ".dll" else ".so"
    shutil.copy2(cdylib, stage / f"loja_lab_py{suffix}")
    sys.path.insert(0, str(stage))
    import loja_lab_py

    return loja_lab_py


def approx(a: float, b: float, rel: float = 1e-9) -> bool:
    return abs(a - b) <= rel * (1.0 + abs(b))


def main() -> None:
    lab = import_module()

    # Constrained flow: double-well energy with conserved mass.
    grid = lab.Grid1D(0.0, 1.0, 99)
    assert grid.n == 99 and approx(grid.h, 0.01)
    energy = lab.allen_cahn(grid)
    constraint = lab.mass(grid, 0.0)
    u0 = [1e-2 * math.sin(2.0 * math.pi * x) for x in grid.nodes()]
    result = lab.run_flow(
        energy, constraint, u0, dt_max=1e-3, t_max=1.0, record_every=50
    )
    assert result.status == "converged", result.status
    rows = result.records()
    energies = [row[2] for row in rows]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:])), (
        "energy must decrease along the flow"
    )
    assert all(abs(row[3][0]) <= 1e-8 for row in rows), "mass must be conserved"
    assert approx(energies[-1], 0.25, 1e-6), energies[-1]

    # Chart on the unit sphere: closed-form graph height.
    sphere = lab.sphere(3)
    chart = lab.build_chart(sphere, [0.0, 0.0, 1.0])
    assert chart.dim_v0 == 2 and chart.dim_v1 == 1
    omega = chart.coefficients([0.3, 0.0, 1.0])
    point = chart.phi(sphere, omega)
    assert approx(point[2], math.sqrt(1.0 - 0.09), 1e-10)

    # Exponent fit on a quartic well: theta = 1/4.
    quartic = lab.monomial(4)
    free = lab.free_constraint(quartic)
    samples = [[10.0 ** (-j / 6.0)] for j in range(1, 13)]
    fit = lab.fit_exponent(quartic, free, [0.0], samples)
    assert abs(fit["theta"] - 0.25) < 1e-9, fit

    # Blow-up sweep: geometric weights double the constant every two
    # dimensions.
    rows = lab.blowup_sweep(list(range(2, 21, 2)))
    for _, _, ratio in rows[1:]:
        assert abs(ratio - 2.0) < 1e-6
    assert approx(rows[-1][1], 2.0 ** 9.5, 1e-6)

    # Multiplier of the cylinder is exactly one.
    rev = lab.revolution(grid)
    vol = lab.volume(grid, math.pi)
    lam = lab.multiplier(rev, vol, [0.0] * grid.n)
    assert approx(lam[0], 1.0, 1e-12)

    print("smoke test: OK")


if __name__ == "__main__":
    main()
