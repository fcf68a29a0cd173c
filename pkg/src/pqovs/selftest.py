"""Reduced-size cross-module checks behind ``pqovs selftest``.

Functions are looked up through their modules at call time so that a
perturbed implementation is what actually gets checked.
"""

from __future__ import annotations

import numpy as np

from . import lensft, specfun, states, wigner


def _bessel_recurrence():
    x = np.linspace(0.5, 60.0, 120)
    worst = 0.0
    for n in (1, 2, 5, 20):
        lhs = specfun.bessel_j(n - 1, x) + specfun.bessel_j(n + 1, x)
        rhs = 2.0 * n / x * specfun.bessel_j(n, x)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    # Neumann sum 1 = J_0 + 2 sum J_2k fixes the overall scale
    for t in (0.7, 8.3, 31.0):
        total = specfun.bessel_j(0, t) + 2.0 * sum(specfun.bessel_j(2 * k, t) for k in range(1, 60))
        worst = max(worst, abs(total - 1.0))
    return worst <= 1e-12, f"max residual {worst:.2e}"


def _bessel_i_recurrence():
    x = np.linspace(0.5, 400.0, 120)
    worst = 0.0
    for n in (1, 3, 10):
        lhs = specfun.bessel_i_scaled(n - 1, x) - specfun.bessel_i_scaled(n + 1, x)
        rhs = 2.0 * n / x * specfun.bessel_i_scaled(n, x)
        worst = max(worst, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
    return worst <= 1e-12, f"max relative residual {worst:.2e}"


def _lens(q):
    def check():
        cfg = states.OpticalConfig()
        spec = states.VortexSpec(15.0, q)
        r = np.linspace(0.0, 30.0, 121)
        prof = lensft.bg_profile(cfg, spec, r, threads=1)
        ref = states.perfect_radial(states.derive_scales(cfg, spec), spec, r, "unitary")
        err = float(np.abs(prof.values - ref).max() / np.abs(ref).max())
        return err <= 1e-6, f"sup relative difference {err:.2e}"

    return check


def _wigner_reality():
    spec = states.VortexSpec(15.0, 2)
    s = wigner.wigner_slice(
        "x_py", spec, states.Axis.symmetric("x", 21.0, 33), states.Axis.symmetric("py", 6.0, 33),
        threads=1,
    )
    res = s.meta["quadrature"]["imag_residual"]
    return res < 1e-8, f"imaginary residual {res:.2e}"


def _wigner_marginal():
    spec = states.VortexSpec(15.0, 2)
    x, y = 14.8, 1.1
    ax = states.Axis.symmetric("px", 9.0, 257)
    s = wigner.wigner_slice("px_py", spec, ax, states.Axis.symmetric("py", 9.0, 257),
                            {"x": x, "y": y}, threads=1)
    total = float(np.trapezoid(np.trapezoid(s.values, dx=ax.step, axis=1), dx=ax.step))
    psi2 = float(abs(wigner.PerfectVortexState(spec)(x, y)) ** 2)
    err = abs(total - psi2) / psi2
    return err <= 1e-4, f"relative difference {err:.2e}"


def _phase_count():
    cfg = states.OpticalConfig()
    spec = states.VortexSpec(15.0, 1)
    f = states.amplitude_grid("perfect", cfg, spec, states.Axis.symmetric("x", 25.0, 128), threads=1)
    n = states.count_phase_jumps(f, 15.0)
    return n == 1, f"winding {n}"


CHECKS = [
    ("Bessel recurrence", _bessel_recurrence),
    ("modified Bessel recurrence", _bessel_i_recurrence),
    ("lens transform q=0", _lens(0)),
    ("lens transform q=2", _lens(2)),
    ("Wigner reality", _wigner_reality),
    ("Wigner marginal", _wigner_marginal),
    ("phase count q=1", _phase_count),
]


def run_selftest(write=print) -> bool:
    """Run every check, print a pass/fail table and return overall success."""
    ok_all = True
    width = max(len(name) for name, _ in CHECKS)
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok = bool(ok)
        ok_all &= ok
        write(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    write("selftest passed" if ok_all else "selftest FAILED")
    return ok_all
