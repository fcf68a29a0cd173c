"""Two-mode Wigner function of the perfect vortex state.

Two evaluation routes are provided.

``analytic``
    A direct transcription of the closed form, kept for speed and
    for comparison.  Its absolute scale is not trusted.
``definition``
    The defining integral

        W(r, p) = (1 / 4 pi^2) int psi(r + R/2) psi*(r - R/2) exp(+i R.p) d^2R

    with a unit-normalised ``psi``.  The state is tabulated once on a uniform
    grid whose nodes contain the requested positions, and the ``R`` integral
    is done by the trapezoid rule on that grid (``R = 2 * step * m``).  The
    integrand is smooth and decays like a Gaussian, so the rule converges
    spectrally; every result is re-evaluated with half the step and must
    agree to ``QuadSpec.tol``.

All coordinates are dimensionless: positions in units of sigma and momenta
in units of 1/sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import specfun
from ._parallel import map_blocks
from .errors import (
    AccuracyError,
    DomainTooSmallError,
    InvalidArgumentError,
    NumericalError,
)
from .lensft import gauss_legendre_panels
from .states import Axis, DerivedScales, VortexSpec

__all__ = [
    "PLANES",
    "PhaseSpacePoint",
    "QuadSpec",
    "PerfectVortexState",
    "WignerSlice",
    "NegativityCurve",
    "wigner_analytic",
    "wigner_definition",
    "wigner_slice",
    "negativity_volume",
    "negativity_scan",
]

COORDS = ("x", "y", "px", "py")
PLANES = {
    "xy": ("x", "y"),
    "x_px": ("x", "px"),
    "x_py": ("x", "py"),
    "y_py": ("y", "py"),
    "y_px": ("y", "px"),
    "px_py": ("px", "py"),
}
SIGN_CONVENTION = "psi(r+R/2) psi*(r-R/2) exp(+i R.p)"


@dataclass(frozen=True)
class PhaseSpacePoint:
    x: float = 0.0
    y: float = 0.0
    px: float = 0.0
    py: float = 0.0

    def __post_init__(self):
        for c in COORDS:
            if not math.isfinite(getattr(self, c)):
                raise InvalidArgumentError(f"{c} must be finite")


@dataclass(frozen=True)
class QuadSpec:
    """Settings of the definition-method quadrature.

    Attributes
    ----------
    momentum_tail : float
        Momentum content of ``psi`` beyond the largest requested momentum.
        The table step is ``pi / (max|p| + momentum_tail)``.
    tol : float
        Largest accepted change on halving the step, relative to the slice
        maximum.
    refine_rows : int
        For slices with a varying position and a varying momentum, the
        number of rows recomputed at half step.
    imag_tol : float
        Largest accepted imaginary residual relative to the slice maximum.
    """

    momentum_tail: float = 9.0
    tol: float = 1e-6
    refine_rows: int = 16
    imag_tol: float = 1e-8

    def as_dict(self) -> dict:
        return {
            "rule": "uniform trapezoid in R on a tabulated state",
            "momentum_tail": self.momentum_tail,
            "tol": self.tol,
            "refine_rows": self.refine_rows,
            "imag_tol": self.imag_tol,
        }


class PerfectVortexState:
    """Unit-normalised perfect vortex ``psi(x, y)`` up to a global phase.

    ``psi = C exp(-(r - alpha)^2) e^{-2 alpha r} I_q(2 alpha r) e^{i q theta}``.
    ``C`` comes from a Gauss-Legendre radial quadrature, which is checked
    against the closed form ``(pi / 2) e^{-alpha^2} I_q(alpha^2)`` of the
    unnormalised norm.
    """

    def __init__(self, spec: VortexSpec, support_margin: float = 7.0):
        self.spec = spec
        self.support_radius = spec.alpha + support_margin
        r, w = gauss_legendre_panels(0.0, spec.alpha + 12.0, 0.25)
        prof = self._profile(r)
        norm2 = float(2.0 * math.pi * np.sum(prof**2 * r * w))
        closed = 0.5 * math.pi * specfun.bessel_i_scaled(spec.charge, spec.alpha**2)
        if abs(norm2 - closed) > 1e-10 * closed:
            raise AccuracyError(f"radial norm {norm2!r} disagrees with closed form {closed!r}")
        self.norm_sq = norm2
        self.scale = 1.0 / math.sqrt(norm2)

    def _profile(self, r):
        a = self.spec.alpha
        return np.exp(-((r - a) ** 2)) * specfun.bessel_i_scaled(self.spec.charge, 2.0 * a * r)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        carrier = np.exp(1j * self.spec.charge * np.arctan2(y, x))
        return self.scale * self._profile(r) * carrier


@dataclass
class WignerSlice:
    """Real 2-D cut; ``values[j, i]`` is at ``axis1.values[i]``, ``axis2.values[j]``."""

    plane: str
    fixed: dict
    axis1: Axis
    axis2: Axis
    values: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.plane not in PLANES:
            raise InvalidArgumentError(f"unknown plane {self.plane!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.axis2.count, self.axis1.count):
            raise InvalidArgumentError("values shape does not match the axes")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("slice contains non-finite values")


@dataclass
class NegativityCurve:
    entries: list = field(default_factory=list)

    @property
    def charges(self) -> list[int]:
        return [e["q"] for e in self.entries]

    @property
    def values(self) -> np.ndarray:
        return np.array([e["n_value"] for e in self.entries], dtype=float)

    @property
    def failures(self) -> list[dict]:
        return [e for e in self.entries if e.get("error")]


# ---------------------------------------------------------------- analytic


def _log_sum_factorials(q: int) -> float:
    logs = np.array([specfun.log_factorial(k) for k in range(q + 1)])
    top = logs.max()
    return float(top + math.log(np.exp(logs - top).sum()))


def _analytic(scales: DerivedScales, spec: VortexSpec, x, y, px, py):
    q = spec.charge
    if q > 50:
        raise InvalidArgumentError("the closed form is supported for q <= 50")
    x, y, px, py = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, px, py)))
    r2 = x**2 + y**2
    p2 = px**2 + py**2
    sigma = scales.sigma
    # B |r|^2 with B = 2 r_c / sigma^2 and |r| = r~ sigma
    z = scales.coeff_b * r2 * sigma**2
    lag_arg = 2.0 * r2 + 0.5 * p2 + 2.0 * (px * y - py * x)
    lag = specfun.laguerre(q, lag_arg.ravel()).reshape(x.shape)
    log_const = (
        2.0 * scales.coeff_a_log
        - math.log(4.0 * math.pi**2)
        + _log_sum_factorials(q)
        + (1 - q) * math.log(2.0)
        + math.log(math.pi)
        + (2 * q + 2) * math.log(sigma)
    )
    with np.errstate(divide="ignore"):
        log_mag = (
            log_const
            - 2.0 * r2
            - 0.5 * p2
            + specfun.log_bessel_i(q, z.ravel()).reshape(x.shape)
            + np.log(np.abs(lag))
        )
    return (-1.0) ** q * np.sign(lag) * np.exp(log_mag)


def wigner_analytic(scales: DerivedScales, spec: VortexSpec, p: PhaseSpacePoint) -> float:
    """Closed-form Wigner value, transcribed term by term.

    The constant ``sum_{k<=q} k!`` and the Bessel argument ``B |r|^2`` are
    kept literally; everything is combined in log space.
    """
    return float(_analytic(scales, spec, p.x, p.y, p.px, p.py))


# -------------------------------------------------------------- definition


@dataclass
class _TableAxis:
    coords: np.ndarray
    step: float
    index: np.ndarray  # table index of each requested position


def _table_axis(positions: np.ndarray, step: float, stride: int, support: float) -> _TableAxis:
    anchor = positions[0]
    lo = min(-support, positions.min())
    hi = max(support, positions.max())
    start = math.floor((lo - anchor) / step - 1e-9)
    stop = math.ceil((hi - anchor) / step + 1e-9)
    coords = anchor + step * np.arange(start, stop + 1)
    index = -start + stride * np.arange(positions.size)
    return _TableAxis(coords, step, index)


def _phases(h: float, half: int, p: np.ndarray) -> np.ndarray:
    return np.exp(1j * h * np.outer(np.arange(-half, half + 1), p))


def _point_block(T, ia, ib, h1, h2, p1, p2):
    n1, n2 = T.shape
    ma = min(ia, n1 - 1 - ia)
    mb = min(ib, n2 - 1 - ib)
    A = T[ia - ma : ia + ma + 1, ib - mb : ib + mb + 1]
    K = A * np.conj(A[::-1, ::-1])
    E1 = _phases(h1, ma, p1)
    E2 = _phases(h2, mb, p2)
    if p2.size <= p1.size:
        return E1.T @ (K @ E2)
    return (E1.T @ K) @ E2


def _positions_grid(psi, xs, ys, pxs, pys, steps, strides, rows, threads):
    """Complex W on the product grid, shape (len xs, len ys, len pxs, len pys).

    ``rows`` selects a subset of the position pairs (flattened x-major);
    other entries are left as NaN.
    """
    support = psi.support_radius
    ax1 = _table_axis(xs, steps[0], strides[0], support)
    ax2 = _table_axis(ys, steps[1], strides[1], support)
    T = psi(ax1.coords[:, None], ax2.coords[None, :])
    h1, h2 = 2.0 * steps[0], 2.0 * steps[1]
    scale = h1 * h2 / (4.0 * math.pi**2)
    out = np.full((xs.size, ys.size, pxs.size, pys.size), np.nan, dtype=complex)

    if xs.size > 1 and ys.size > 1:
        if pxs.size != 1 or pys.size != 1:
            raise InvalidArgumentError("the position plane needs fixed momenta")
        a = np.arange(T.shape[0])[:, None]
        b = np.arange(T.shape[1])[None, :]
        U = T * np.exp(1j * (steps[0] * pxs[0] * a + steps[1] * pys[0] * b))
        S = fftconvolve(U, np.conj(U))
        block = S[np.ix_(2 * ax1.index, 2 * ax2.index)] * scale
        out[:, :, 0, 0] = block
        return out

    pairs = [(i, j) for i in range(xs.size) for j in range(ys.size)]
    pairs = [pairs[k] for k in rows] if rows is not None else pairs

    def work(k0, k1):
        return [
            _point_block(T, ax1.index[i], ax2.index[j], h1, h2, pxs, pys) * scale
            for i, j in pairs[k0:k1]
        ]

    blocks = [b for chunk in map_blocks(work, len(pairs), threads) for b in chunk]
    for (i, j), b in zip(pairs, blocks):
        out[i, j] = b
    return out


def _base_steps(xs, ys, pxs, pys, quad: QuadSpec):
    steps, strides = [], []
    for pos, mom in ((xs, pxs), (ys, pys)):
        dmax = math.pi / (float(np.abs(mom).max()) + quad.momentum_tail)
        if pos.size > 1:
            spacing = float(pos[1] - pos[0])
            stride = max(1, math.ceil(spacing / dmax - 1e-9))
            steps.append(spacing / stride)
            strides.append(stride)
        else:
            steps.append(dmax)
            strides.append(1)
    return steps, strides


def _evaluate(psi, xs, ys, pxs, pys, quad: QuadSpec, threads):
    xs, ys, pxs, pys = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (xs, ys, pxs, pys))
    steps, strides = _base_steps(xs, ys, pxs, pys, quad)
    W = _positions_grid(psi, xs, ys, pxs, pys, steps, strides, None, threads)

    n_pos = xs.size * ys.size
    rows = None
    if n_pos > 1 and not (xs.size > 1 and ys.size > 1):
        rows = sorted(set(np.linspace(0, n_pos - 1, min(quad.refine_rows, n_pos)).round().astype(int)))
    fine = _positions_grid(
        psi, xs, ys, pxs, pys, [s / 2 for s in steps], [2 * s for s in strides], rows, threads
    )
    peak = float(np.abs(W.real).max())
    floor = max(peak, 1e-12 / math.pi**2)
    mask = ~np.isnan(fine.real)
    change = float(np.abs(fine[mask] - W[mask]).max()) / floor
    if change > quad.tol:
        raise AccuracyError(f"halving the quadrature step changed W by {change:.3e} of its maximum")
    imag = float(np.abs(W.imag).max()) / floor
    if imag > quad.imag_tol:
        raise AccuracyError(f"imaginary residual {imag:.3e} of the slice maximum")
    info = {
        "step_x": steps[0],
        "step_y": steps[1],
        "refinement_change": change,
        "imag_residual": imag,
        "sign_convention": SIGN_CONVENTION,
    }
    return W.real, info


def wigner_definition(psi, p: PhaseSpacePoint, quad: QuadSpec | None = None) -> float:
    """Wigner value at one phase-space point from the defining integral.

    ``psi`` is a callable ``psi(x, y)`` with a ``support_radius`` attribute
    outside which it is negligible; it must be unit-normalised.
    """
    W, _ = _evaluate(psi, p.x, p.y, p.px, p.py, quad or QuadSpec(), 1)
    return float(W.ravel()[0])


def _slice_values(plane, fixed, axis1, axis2):
    names = PLANES[plane]
    vals = {}
    for c in COORDS:
        if c == names[0]:
            vals[c] = axis1.values
        elif c == names[1]:
            vals[c] = axis2.values
        else:
            vals[c] = np.array([float(fixed.get(c, 0.0))])
    return vals


def _normalise_fixed(plane, fixed):
    if plane not in PLANES:
        raise InvalidArgumentError(f"plane must be one of {sorted(PLANES)}, got {plane!r}")
    fixed = dict(fixed or {})
    held = [c for c in COORDS if c not in PLANES[plane]]
    unknown = set(fixed) - set(held)
    if unknown:
        raise InvalidArgumentError(f"cannot fix {sorted(unknown)} in plane {plane}")
    out = {}
    for c in held:
        v = float(fixed.get(c, 0.0))
        if not math.isfinite(v):
            raise InvalidArgumentError(f"fixed value of {c} must be finite")
        out[c] = v
    return out


def wigner_slice(
    plane: str,
    spec: VortexSpec,
    axis1: Axis,
    axis2: Axis,
    fixed: dict | None = None,
    method: str = "definition",
    scales: DerivedScales | None = None,
    quad: QuadSpec | None = None,
    threads: int | None = None,
) -> WignerSlice:
    """Fill a 2-D cut of the Wigner function.

    ``plane`` names the two varying coordinates (see :data:`PLANES`);
    ``fixed`` gives the other two (default 0).
    """
    fixed = _normalise_fixed(plane, fixed)
    if method not in ("analytic", "definition"):
        raise InvalidArgumentError(f"method must be 'analytic' or 'definition', got {method!r}")
    vals = _slice_values(plane, fixed, axis1, axis2)
    meta = {"q": spec.charge, "alpha": spec.alpha, "method": method, "plane": plane, "fixed": fixed}

    if method == "analytic":
        if scales is None:
            raise InvalidArgumentError("the analytic method needs derived scales")
        grids = np.meshgrid(*(vals[c] for c in COORDS), indexing="ij")
        W4 = _analytic(scales, spec, *grids)
        meta["quadrature"] = None
    else:
        quad = quad or QuadSpec()
        psi = PerfectVortexState(spec)
        W4, info = _evaluate(psi, vals["x"], vals["y"], vals["px"], vals["py"], quad, threads)
        meta["quadrature"] = {**quad.as_dict(), **info, "support_radius": psi.support_radius}

    order = [COORDS.index(c) for c in PLANES[plane]]
    rest = [k for k in range(4) if k not in order]
    # varying axes to the back, then (axis2, axis1)
    values = np.transpose(W4, rest + order[::-1]).reshape(axis2.count, axis1.count)
    return WignerSlice(plane, fixed, axis1, axis2, values, method, meta)


# -------------------------------------------------------------- negativity


def negativity_volume(s: WignerSlice, refine_tol: float = 1e-3, decay: float = 1e-10) -> float:
    """``(1/2) int |W| - 1`` over the slice by the 2-D trapezoid rule.

    The integral is in the dimensionless slice coordinates; the scale
    factors of position and momentum cancel.  The slice boundary must have
    decayed to ``decay`` of the maximum, and the result must agree with the
    one from every second grid point to ``refine_tol`` (absolute).
    """
    W = np.abs(s.values)
    peak = W.max()
    edge = max(W[0].max(), W[-1].max(), W[:, 0].max(), W[:, -1].max())
    if peak == 0 or edge > decay * peak:
        raise DomainTooSmallError(
            f"slice has not decayed at its boundary ({edge / peak if peak else np.inf:.3e} of max)"
        )
    h1, h2 = s.axis1.step, s.axis2.step
    full = 0.5 * np.trapezoid(np.trapezoid(W, dx=h1, axis=1), dx=h2) - 1.0
    if s.axis1.count % 2 == 0 or s.axis2.count % 2 == 0:
        raise InvalidArgumentError("grid refinement check needs odd point counts")
    coarse_w = W[::2, ::2]
    coarse = 0.5 * np.trapezoid(np.trapezoid(coarse_w, dx=2 * h1, axis=1), dx=2 * h2) - 1.0
    if abs(full - coarse) > refine_tol:
        raise AccuracyError(f"grid refinement changed n(W) by {abs(full - coarse):.3e}")
    return float(full)


def negativity_scan(
    q_min: int,
    q_max: int,
    alpha: float = 15.0,
    method: str = "definition",
    x_extent: float | None = None,
    p_extent: float = 8.0,
    grid: tuple[int, int] = (513, 1025),
    scales_for=None,
    quad: QuadSpec | None = None,
    threads: int | None = None,
) -> NegativityCurve:
    """n(W) on the ``x``-``p_y`` cut at ``y = p_x = 0`` for each charge.

    Failures for one charge are recorded in its entry and the scan goes on.
    ``scales_for(spec)`` supplies derived scales for the analytic method.
    """
    if not (0 <= q_min <= q_max <= 20):
        raise InvalidArgumentError("need 0 <= q_min <= q_max <= 20")
    x_extent = alpha + 6.0 if x_extent is None else x_extent
    ax = Axis.symmetric("x", x_extent, grid[0])
    ap = Axis.symmetric("py", p_extent, grid[1])
    curve = NegativityCurve()
    for q in range(q_min, q_max + 1):
        spec = VortexSpec(alpha, q)
        entry = {
            "q": q,
            "method": method,
            "grid": list(grid),
            "x_extent": x_extent,
            "p_extent": p_extent,
        }
        try:
            scales = scales_for(spec) if scales_for else None
            s = wigner_slice("x_py", spec, ax, ap, {"y": 0.0, "px": 0.0}, method, scales, quad, threads)
            entry["n_value"] = negativity_volume(s)
            entry["error"] = None
        except (NumericalError, InvalidArgumentError) as exc:
            entry["n_value"] = math.nan
            entry["error"] = f"{type(exc).__name__}: {exc}"
        curve.entries.append(entry)
    return curve
