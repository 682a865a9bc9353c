#!/usr/bin/env python3
"""Smoke test for the dephasim_py extension module.

Builds nothing itself: run `cargo build -p dephasim-py --release` first.
The script copies the cdylib next to itself under the importable name and
exercises the main entry points against known values.
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libdephasim_py.so",
        ROOT / "target" / "debug" / "libdephasim_py.so",
        ROOT / "target" / "release" / "libdephasim_py.dylib",
        ROOT / "target" / "debug" / "libdephasim_py.dylib",
    ]
    src = next((c for c in candidates if c.exists()), None)
    if src is None:
        sys.exit(
            "library not found; run `cargo build -p dephasim-py --release` first"
        )
    suffix = ".so" if src.suffix == ".so" else ".so"  # CPython loads .so on mac too
    dst = HERE / ("dephasim_py" + suffix)
    if not dst.exists() or src.stat().st_mtime > dst.stat().st_mtime:
        shutil.copy2(src, dst)
    sys.path.insert(0, str(HERE))
    import dephasim_py

    return dephasim_py


def approx(got, want, rel=1e-9, label=""):
    assert want != 0 and abs(got - want) / abs(want) < rel, (
        f"{label}: got {got!r}, want {want!r}"
    )
    print(f"  ok: {label} = {got:.6e}")


def main():
    dp = load_module()
    print("module loaded:", dp.__name__)

    # Bessel: K_{1/2}(1) = sqrt(pi/2)/e, K_0(1) reference
    k_half, under = dp.bessel_k(1, 1.0)
    approx(k_half, math.sqrt(math.pi / 2.0) / math.e, 1e-12, "K_{1/2}(1)")
    assert not under
    k0, _ = dp.bessel_k(0, 1.0)
    approx(k0, 0.42102443824070834, 1e-11, "K_0(1)")

    iface = dp.Interferometer(
        mass=1e-15,
        max_separation=20e-6,
        accel_time=0.5,
        hold_time=1.0,
        charge=dp.ELEMENTARY_CHARGE,
    )
    approx(iface.total_time(), 3.0, 1e-15, "tau")
    # F(omega -> 0) = dx^2 (2 t_a + t_e)^2
    approx(iface.transfer_function(1e-7), 1.6e-9, 1e-9, "F(0+)")
    # separation plateau
    approx(iface.arm_separation(1.5), 20e-6, 1e-12, "arm separation @ hold")

    particle = dp.Particle(charge=dp.ELEMENTARY_CHARGE)
    enc = dp.Encounter(impact_parameter=1e-4, speed=1e-5)

    # closest-approach cc acceleration: kappa_e e^2/(m b^2)
    a0 = dp.acceleration_time("cc", iface, particle, enc, 0.0)
    approx(a0, 2.3070775038950056e-05, 1e-6, "a_cc(0)")

    r = dp.dephasing("cc", iface, particle, enc)
    approx(r["gamma_n"], 1.3530531342554667e2, 1e-6, "Gamma_n (reference point)")

    # witness algebra
    approx(dp.witness_expectation(math.pi / 2, 0.0), -0.5, 1e-12, "<W>(pi/2, 0)")
    det, w, margin = dp.detectable(0.1, 0.0)
    assert det and w < 0.0
    det, w, margin = dp.detectable(0.0, 0.3)
    assert not det

    # ensemble scenario: linear in number density
    g1 = dp.qgem_ensemble_dephasing(
        dp.Interferometer(
            mass=1e-15,
            max_separation=10e-6,
            accel_time=1.0 / 6.0,
            hold_time=1.0 / 3.0,
            dipole_moment=0.1 * dp.E_MICROMETRE,
            relative_permittivity=5.1,
        ),
        dp.Particle(dipole_moment=6.17e-30),
        1e10,
        0.01,
        1e-4,
        4.8e-26,
        1e-6,
    )
    g2 = dp.qgem_ensemble_dephasing(
        dp.Interferometer(
            mass=1e-15,
            max_separation=10e-6,
            accel_time=1.0 / 6.0,
            hold_time=1.0 / 3.0,
            dipole_moment=0.1 * dp.E_MICROMETRE,
            relative_permittivity=5.1,
        ),
        dp.Particle(dipole_moment=6.17e-30),
        2e10,
        0.01,
        1e-4,
        4.8e-26,
        1e-6,
    )
    approx(g2 / g1, 2.0, 1e-10, "ensemble linearity")

    # Monte Carlo oracle runs and is reproducible
    est1 = dp.phase_noise_mc("cc", iface, particle, enc, realizations=300, seed=5)
    est2 = dp.phase_noise_mc("cc", iface, particle, enc, realizations=300, seed=5)
    assert est1["variance"] == est2["variance"]
    assert est1["variance"] > 0.0
    print(f"  ok: MC variance reproducible = {est1['variance']:.6e}")

    # angle optimiser regimes
    a_fast, b_fast = dp.optimal_angles("cc", 10.0)
    assert abs(b_fast) < 0.02
    a_slow, b_slow = dp.optimal_angles("cc", 0.1)
    assert abs(a_slow) < 0.02
    print("  ok: optimal angles match the slow/fast regimes")

    # error surfaces
    try:
        dp.Encounter(impact_parameter=1e-4, speed=0.0)
    except ValueError as e:
        assert "speed" in str(e)
        print("  ok: invalid input raises ValueError")
    else:
        sys.exit("expected ValueError for zero speed")

    print("smoke test passed")


if __name__ == "__main__":
    main()
