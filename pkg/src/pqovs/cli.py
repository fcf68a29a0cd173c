"""Command-line interface: ``pqovs {quad,phase,wigner,negvol,selftest}``.

Exit status: 0 success, 1 usage error, 2 numerical error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, io, selftest
from .errors import InvalidArgumentError, NumericalError
from .states import (
    Axis,
    OpticalConfig,
    VortexSpec,
    amplitude_grid,
    bg_core_radius,
    count_phase_jumps,
    derive_scales,
    ring_radius,
)
from .wigner import PLANES, negativity_scan, wigner_slice

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_at_least(lo):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return conv


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text!r}")
    return v


def _grid(text):
    parts = text.lower().split("x")
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}")
    conv = _int_at_least(16)
    vals = tuple(conv(p) for p in parts)
    return vals if len(vals) == 2 else (vals[0], vals[0])


def _fixed(text):
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in ("x", "y", "px", "py"):
            raise argparse.ArgumentTypeError(f"expected name=value with name in x,y,px,py; got {item!r}")
        try:
            v = float(val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad value in {item!r}")
        if not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"value in {item!r} must be finite")
        out[key] = v
    return out


def _add_optics(p, q_default=1):
    p.add_argument("--q", type=_int_at_least(0), default=q_default, help="topological charge")
    p.add_argument("--alpha", type=_positive, default=15.0, help="coherent amplitude |zeta|")
    p.add_argument("--lambda-nm", type=_positive, default=810.0, help="wavelength in nm")
    p.add_argument("--focal-cm", type=_positive, default=70.0, help="lens focal length in cm")


def _add_common(p):
    p.add_argument("--threads", type=_int_at_least(1), default=None, help="worker threads")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pqovs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pqovs {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    for name, helptext in (("quad", "complex amplitude on a grid"), ("phase", "phase on a grid")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--state", choices=("bg", "perfect"), default="perfect")
        _add_optics(p)
        p.add_argument("--grid", type=_grid, default=(512, 512))
        p.add_argument("--extent", type=_positive, default=None,
                       help="half-width of the grid (default alpha+10 for perfect, 6 for bg)")
        _add_common(p)

    p = sub.add_parser("wigner", help="2-D Wigner slice of the perfect vortex")
    _add_optics(p, q_default=2)
    p.add_argument("--plane", choices=sorted(PLANES), default="x_py")
    p.add_argument("--fixed", type=_fixed, default={}, help="held coordinates, e.g. y=0,px=0")
    p.add_argument("--grid", type=_grid, default=(129, 129))
    p.add_argument("--extent", type=_positive, default=None, help="position half-width (default alpha+6)")
    p.add_argument("--p-extent", type=_positive, default=8.0, help="momentum half-width")
    p.add_argument("--method", choices=("definition", "analytic"), default="definition")
    _add_common(p)

    p = sub.add_parser("negvol", help="negativity volume against charge")
    p.add_argument("--q-min", type=_int_at_least(0), default=0)
    p.add_argument("--q-max", type=_int_at_least(0), default=8)
    p.add_argument("--alpha", type=_positive, default=15.0)
    p.add_argument("--lambda-nm", type=_positive, default=810.0)
    p.add_argument("--focal-cm", type=_positive, default=70.0)
    p.add_argument("--method", choices=("definition", "analytic"), default="definition")
    p.add_argument("--grid", type=_grid, default=(513, 1025), help="N or NxM (x by p_y)")
    p.add_argument("--extent", type=_positive, default=None, help="x half-width (default alpha+6)")
    p.add_argument("--p-extent", type=_positive, default=8.0, help="p_y half-width")
    _add_common(p)

    sub.add_parser("selftest", help="run the reduced oracle checks")
    return parser


def _fmt_fixed(fixed: dict) -> str:
    return ",".join(f"{k}={fixed[k]!r}" for k in ("x", "y", "px", "py") if k in fixed)


def _options(ns, names) -> dict:
    out = {}
    for name in names:
        v = getattr(ns, name.replace("-", "_"))
        if name == "grid":
            v = f"{v[0]}x{v[1]}"
        elif name == "fixed":
            v = _fmt_fixed(v)
        elif isinstance(v, float):
            v = repr(v)
        else:
            v = str(v)
        out[name] = v
    return out


def _config(ns):
    cfg = OpticalConfig(wavelength=ns.lambda_nm / 1e9, focal_length=ns.focal_cm / 100.0)
    return cfg


def _scale_meta(cfg, spec) -> dict:
    sc = derive_scales(cfg, spec)
    return {"sigma_m": sc.sigma, "r_core_m": sc.r_core, "wavelength_m": cfg.wavelength,
            "focal_length_m": cfg.focal_length}


def _run_grid(ns):
    cfg = _config(ns)
    spec = VortexSpec(ns.alpha, ns.q)
    if ns.extent is None:
        ns.extent = ns.alpha + 10.0 if ns.state == "perfect" else 6.0
    labels = ("x", "y") if ns.state == "perfect" else ("rho_x", "rho_y")
    a1 = Axis.symmetric(labels[0], ns.extent, ns.grid[0])
    a2 = Axis.symmetric(labels[1], ns.extent, ns.grid[1])
    field = amplitude_grid(ns.state, cfg, spec, a1, a2, threads=ns.threads)
    opts = _options(ns, ["state", "q", "alpha", "lambda-nm", "focal-cm", "grid", "extent"])
    meta = {"command": ns.command, "options": opts, **field.meta, **_scale_meta(cfg, spec)}
    meta["units"] = "positions in sigma" if ns.state == "perfect" else "input quadrature"
    if ns.command == "quad":
        header, rows = io.field_rows(field)
    else:
        phase = np.angle(field.values)
        if ns.state == "perfect":
            radius = ring_radius(derive_scales(cfg, spec), spec)
        else:
            radius = bg_core_radius(spec) or 0.5 / spec.alpha
        meta["winding_circle_radius"] = radius
        try:
            meta["winding"] = count_phase_jumps(field, radius)
        except NumericalError as exc:
            meta["winding"] = f"undetermined: {exc}"
        header, rows = io.slice_rows(a1, a2, phase)
    io.write_csv(ns.out, meta, header, rows)


def _run_wigner(ns):
    cfg = _config(ns)
    spec = VortexSpec(ns.alpha, ns.q)
    if ns.extent is None:
        ns.extent = ns.alpha + 6.0
    names = PLANES[ns.plane]
    axes = [
        Axis.symmetric(n, ns.extent if n in ("x", "y") else ns.p_extent, ns.grid[k])
        for k, n in enumerate(names)
    ]
    s = wigner_slice(ns.plane, spec, axes[0], axes[1], ns.fixed, ns.method,
                     derive_scales(cfg, spec), threads=ns.threads)
    ns.fixed = s.fixed
    opts = _options(ns, ["q", "alpha", "lambda-nm", "focal-cm", "plane", "fixed", "grid",
                         "extent", "p-extent", "method"])
    meta = {"command": "wigner", "options": opts, **s.meta, **_scale_meta(cfg, spec),
            "units": "positions in sigma, momenta in 1/sigma"}
    header, rows = io.slice_rows(axes[0], axes[1], s.values)
    io.write_csv(ns.out, meta, header, rows)


def _run_negvol(ns):
    if ns.q_min > ns.q_max or ns.q_max > 20:
        raise UsageError("negvol: need q-min <= q-max <= 20")
    if ns.grid[0] % 2 == 0 or ns.grid[1] % 2 == 0:
        raise UsageError("negvol: --grid needs odd point counts for the refinement check")
    cfg = _config(ns)
    if ns.extent is None:
        ns.extent = ns.alpha + 6.0
    curve = negativity_scan(
        ns.q_min, ns.q_max, ns.alpha, ns.method, ns.extent, ns.p_extent, ns.grid,
        scales_for=lambda spec: derive_scales(cfg, spec), threads=ns.threads,
    )
    opts = _options(ns, ["q-min", "q-max", "alpha", "lambda-nm", "focal-cm", "method", "grid",
                         "extent", "p-extent"])
    meta = {
        "command": "negvol",
        "options": opts,
        "method": ns.method,
        "slice": {"plane": "x_py", "fixed": {"y": 0.0, "px": 0.0}},
        "failures": {str(e["q"]): e["error"] for e in curve.failures},
        **_scale_meta(cfg, VortexSpec(ns.alpha, ns.q_min)),
    }
    header, rows = io.curve_rows(curve.charges, curve.values)
    io.write_csv(ns.out, meta, header, rows)
    if curve.failures:
        for e in curve.failures:
            print(f"pqovs: q={e['q']}: {e['error']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command == "selftest":
            return EXIT_OK if selftest.run_selftest() else EXIT_NUMERICAL
        if ns.command in ("quad", "phase"):
            return _run_grid(ns) or EXIT_OK
        if ns.command == "wigner":
            return _run_wigner(ns) or EXIT_OK
        return _run_negvol(ns)
    except UsageError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidArgumentError as exc:
        print(f"pqovs: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"pqovs: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"pqovs: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
