"""Adaptive integration of scalar Sturm-Liouville equations w'' + b(r) w = 0
with event detection for zeros and extrema, the index form, and the Picone
comparison residual.

The integrator is an adaptive 8th-order embedded pair (DOP853) with dense
output.  Stored trajectories carry a refined grid on which the midpoint
Hermite reconstruction satisfies the ODE-residual bound
|w'' + b w| <= tol * (|b w| + 1); zeros and extrema are bracketed on that
grid and polished on the dense interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import DomainMismatch, NonFiniteCoefficient, StepUnderflow, YVanished

_TINY_SIGN = 1e-300


@dataclass(frozen=True)
class CurvatureProfile:
    """A positive radial curvature coefficient r -> b(r) on [r_min, infinity).

    eval must be deterministic; breakpoints lists interior radii where the
    coefficient is allowed to jump (the integrator splits there).
    """

    func: Callable[[float], float]
    r_min: float = 0.0
    label: str = ""
    breakpoints: tuple = ()

    def __call__(self, r: float) -> float:
        return float(self.func(r))

    def values(self, rs) -> np.ndarray:
        """Vectorised evaluation with a scalar fallback."""
        rs = np.asarray(rs, dtype=float)
        try:
            out = np.asarray(self.func(rs), dtype=float)
            if out.shape == rs.shape:
                return out
        except Exception:
            pass
        return np.array([float(self.func(float(r))) for r in np.atleast_1d(rs)])


class _PiecewiseDense:
    """Dense output stitched across breakpoints; evaluates (w, w')."""

    def __init__(self, pieces):
        # pieces: list of (r_lo, r_hi, OdeSolution)
        self.pieces = pieces

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rs = np.clip(np.atleast_1d(r), self.pieces[0][0], self.pieces[-1][1])
        w = np.empty_like(rs)
        wp = np.empty_like(rs)
        for lo, hi, sol in self.pieces:
            mask = (rs >= lo) & (rs <= hi)
            if np.any(mask):
                vals = sol(rs[mask])
                w[mask] = vals[0]
                wp[mask] = vals[1]
        if scalar:
            return float(w[0]), float(wp[0])
        return w, wp


@dataclass
class SLTrajectory:
    """Dense numerical solution of w'' + b(r) w = 0 with recorded events.

    grid/w/wp hold the refined output grid; zeros and extrema are the
    polished event radii, strictly inside (r_start, r_end].
    """

    profile: CurvatureProfile
    grid: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    zeros: np.ndarray
    extrema: np.ndarray
    r_start: float
    r_end: float
    tol: float
    dense: _PiecewiseDense = field(repr=False)

    def evaluate(self, r):
        """(w, w') anywhere inside [r_start, r_end]."""
        return self.dense(r)

    def residual_report(self) -> float:
        """Max over grid midpoints of |w'' + b w| / (tol * (|b w| + 1)).

        The midpoint state is reconstructed by two-point quintic Hermite
        interpolation of the stored nodes, using w'' = -b w at the nodes
        (the only second derivative consistent with the stored data); the
        defect of that reconstruction against the ODE is the residual.
        """
        res, _, _ = _hermite_defect(
            self.profile, self.grid, self.w, self.wp, self.tol
        )
        return float(res.max())

    def restricted(self, r_lo: float, r_hi: float) -> "SLTrajectory":
        """The same trajectory cut down to [r_lo, r_hi] (endpoints included exactly)."""
        m = (self.grid > r_lo) & (self.grid < r_hi)
        grid = np.concatenate([[r_lo], self.grid[m], [r_hi]])
        w, wp = self.dense(grid)
        return SLTrajectory(
            profile=self.profile,
            grid=grid,
            w=w,
            wp=wp,
            zeros=self.zeros[(self.zeros > r_lo) & (self.zeros <= r_hi)],
            extrema=self.extrema[(self.extrema > r_lo) & (self.extrema <= r_hi)],
            r_start=float(r_lo),
            r_end=float(r_hi),
            tol=self.tol,
            dense=self.dense,
        )


def _checked_rhs(profile: CurvatureProfile):
    def rhs(r, y):
        b = profile.func(r)
        if not math.isfinite(b):
            raise NonFiniteCoefficient(
                f"profile {profile.label!r} evaluated to {b} at r = {r}"
            )
        return (y[1], -b * y[0])

    return rhs


def _solver_rtol(tol: float) -> float:
    return max(1e-3 * tol, 2.5e-14)


def _solve_piece(profile, r_lo, r_hi, y0, tol, scale):
    rtol = _solver_rtol(tol)
    atol = max(1e-11 * tol * scale, 1e-280)
    sol = solve_ivp(
        _checked_rhs(profile),
        (r_lo, r_hi),
        y0,
        method="DOP853",
        dense_output=True,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        if "step size" in (sol.message or "").lower():
            raise StepUnderflow(sol.message)
        raise StepUnderflow(f"integration failed on [{r_lo}, {r_hi}]: {sol.message}")
    return sol


def _hermite_defect(profile, grid, w, wp, tol):
    """Normalised quintic-Hermite midpoint defect per interval, and midpoints.

    With nodal data (w, w') and the ODE-implied w'' = -b w, the midpoint
    reconstruction is

        w_m   = (w0+w1)/2 + 5h(w0'-w1')/32 + h^2(w0''+w1'')/64
        w''_m = 3(w1'-w0')/(2h) - (w0''+w1'')/4

    and the defect |w''_m + b(r_m) w_m| is O(h^4) for consistent data.
    Nodal b is sampled a few ulps inside each interval so that coefficient
    jumps at breakpoints land on the correct side.
    """
    r0, r1 = grid[:-1], grid[1:]
    h = r1 - r0
    rm = 0.5 * (r0 + r1)
    nudge = np.maximum(1e-9 * h, 4.0 * np.spacing(np.abs(r1)))
    s0 = -profile.values(r0 + nudge) * w[:-1]
    s1 = -profile.values(r1 - nudge) * w[1:]
    wm = (
        0.5 * (w[:-1] + w[1:])
        + h * (wp[:-1] - wp[1:]) * (5.0 / 32.0)
        + h * h * (s0 + s1) / 64.0
    )
    wppm = 1.5 * (wp[1:] - wp[:-1]) / h - 0.25 * (s0 + s1)
    bm = profile.values(rm)
    denom = np.abs(bm * wm) + 1.0
    res = np.abs(wppm + bm * wm) / (tol * denom)
    return res, rm, denom


_EPS = float(np.finfo(float).eps)


def _running_floor(w, wp, tol, rtol_solver, scales):
    """Per-node certifiable resolution floor.

    The difference quotient amplifies both the interpolant error
    (~rtol_solver * running max|w|: errors accumulate forward and do not
    shrink where the solution later passes near zero) and the float
    representation error (~eps * running max|w'|) by 1/h; below this floor
    refinement only adds noise.
    """
    runw = np.maximum.accumulate(np.maximum(np.abs(w), scales[0]))
    runwp = np.maximum.accumulate(np.maximum(np.abs(wp), scales[1]))
    return 9.0 * (rtol_solver * runw + _EPS * runwp) / (0.7 * tol)


def _thin_nodes(nodes, floor):
    """Drop solver nodes packed tighter than the certifiable resolution
    (DOP853's startup ramp produces nanometer steps near the start)."""
    keep = [0]
    for i in range(1, len(nodes) - 1):
        if (nodes[i] - nodes[keep[-1]] >= floor[i]
                and nodes[-1] - nodes[i] >= floor[i]):
            keep.append(i)
    keep.append(len(nodes) - 1)
    return nodes[np.asarray(keep)]


def _refine_grid(profile, dense, r_nodes, tol, rtol_solver, scales, max_depth=12):
    """Bisect intervals until the Hermite-midpoint defect meets the bound.

    scales = (max|w|, max|w'|) carried in from earlier pieces; intervals at
    their local noise floor are left alone, and the loop exits when the
    worst refinable defect stops improving.
    """
    nodes = np.asarray(r_nodes, dtype=float)
    w, wp = dense(nodes)
    floor = _running_floor(w, wp, tol, rtol_solver, scales)
    grid = _thin_nodes(nodes, floor)
    prev_worst = math.inf
    for _ in range(max_depth):
        w, wp = dense(grid)
        res, rm, denom = _hermite_defect(profile, grid, w, wp, tol)
        h = np.diff(grid)
        floor = _running_floor(w, wp, tol, rtol_solver, scales)
        f_iv = np.maximum(floor[:-1], floor[1:])
        # The defect bound scales with (1 + |b w|), so intervals with a large
        # local bound tolerate proportionally finer grids before noise wins.
        refinable = h > np.maximum(2.0 * f_iv / denom, 64.0 * np.spacing(rm))
        bad = (res > 0.7) & refinable
        if not np.any(bad):
            break
        worst = float(res[refinable].max())
        if worst >= 0.8 * prev_worst:
            break
        prev_worst = worst
        grid = np.sort(np.concatenate([grid, rm[bad]]))
    wmax = max(scales[0], float(np.max(np.abs(w))))
    wpmax = max(scales[1], float(np.max(np.abs(wp))))
    return grid, (wmax, wpmax)


def _polish_zeros(fun, grid, vals, tol, lo_open):
    """Bracketed sign changes of vals refined on fun; skips the open left end."""
    out = []
    start = 0
    if lo_open:
        while start < len(vals) and abs(vals[start]) < _TINY_SIGN:
            start += 1
    for i in range(start, len(vals) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            continue
        if b == 0.0:
            out.append(grid[i + 1])
            continue
        if (a > 0) != (b > 0):
            xtol = 0.25 * tol * max(1.0, grid[i + 1])
            out.append(
                brentq(fun, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            )
    return np.asarray(out)


def integrate_sl(
    profile: CurvatureProfile,
    r_start: float,
    w0: float,
    w0p: float,
    r_end: float,
    tol: float = 1e-9,
) -> SLTrajectory:
    """Integrate w'' + b(r) w = 0 from (w0, w0p) at r_start out to r_end.

    tol in [1e-13, 1e-3] controls both the solver tolerance and the stored
    grid's ODE-residual bound; zeros are located to |dr| <= tol * max(1, r).
    The profile is split at its interior breakpoints so coefficient jumps
    never sit inside a solver step.
    """
    if not r_start < r_end:
        raise DomainMismatch(f"need r_start < r_end, got [{r_start}, {r_end}]")
    if not 1e-13 <= tol <= 1e-3:
        raise DomainMismatch(f"tol must lie in [1e-13, 1e-3], got {tol}")
    if r_start < profile.r_min:
        raise DomainMismatch(
            f"profile {profile.label!r} starts at r_min = {profile.r_min} > {r_start}"
        )

    cuts = [r_start]
    cuts += [b for b in sorted(profile.breakpoints) if r_start < b < r_end]
    cuts.append(r_end)
    scale = max(abs(w0), abs(w0p) * min(1.0, r_end - r_start), 1e-8)

    pieces = []
    grids = []
    y = (float(w0), float(w0p))
    scales = (abs(w0), abs(w0p))
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        sol = _solve_piece(profile, lo, hi, y, tol, scale)
        grid, scales = _refine_grid(
            profile,
            lambda r, s=sol.sol: (s(r)[0], s(r)[1]),
            sol.t,
            tol,
            _solver_rtol(tol),
            scales,
        )
        pieces.append((lo, hi, sol.sol))
        grids.append(grid)
        y = tuple(sol.y[:, -1])

    dense = _PiecewiseDense(pieces)
    grid = np.unique(np.concatenate(grids))
    w, wp = dense(grid)

    zeros = _polish_zeros(lambda r: dense(r)[0], grid, w, tol, lo_open=(w0 == 0.0))
    extrema = _polish_zeros(lambda r: dense(r)[1], grid, wp, tol, lo_open=(w0p == 0.0))

    return SLTrajectory(
        profile=profile,
        grid=grid,
        w=w,
        wp=wp,
        zeros=zeros,
        extrema=extrema,
        r_start=float(r_start),
        r_end=float(r_end),
        tol=float(tol),
        dense=dense,
    )


@dataclass(frozen=True)
class SecondZeroResult:
    """First zero beyond the base point, or the evidence there was none.

    When r1 is None, the final value/slope and the extremum count let the
    caller tell 'provably still climbing' apart from 'ran out of domain'.
    """

    r1: Optional[float]
    w_end: float
    wp_end: float
    monotone: bool
    n_extrema: int
    r_searched: float
    trajectory: SLTrajectory = field(repr=False)


def find_second_zero(
    profile: CurvatureProfile,
    r0: float,
    r_max: float,
    tol: float = 1e-9,
) -> SecondZeroResult:
    """First zero strictly beyond r0 of the solution with y(r0) = 0, y'(r0) = 1."""
    traj = integrate_sl(profile, r0, 0.0, 1.0, r_max, tol)
    r1 = float(traj.zeros[0]) if len(traj.zeros) else None
    return SecondZeroResult(
        r1=r1,
        w_end=float(traj.w[-1]),
        wp_end=float(traj.wp[-1]),
        monotone=(len(traj.extrema) == 0),
        n_extrema=len(traj.extrema),
        r_searched=float(r_max),
        trajectory=traj,
    )


@dataclass(frozen=True)
class IndexFormInput:
    """Data for the second-variation integral along a conjugate-point candidate."""

    n: int
    y: SLTrajectory
    ric: CurvatureProfile

    def __post_init__(self):
        if self.n < 2:
            raise DomainMismatch(f"manifold dimension must be >= 2, got {self.n}")
        scale = max(1.0, float(np.max(np.abs(self.y.w))))
        for end, val in ((self.y.r_start, self.y.w[0]), (self.y.r_end, self.y.w[-1])):
            if abs(val) > 50.0 * self.y.tol * scale:
                raise DomainMismatch(
                    f"y({end}) = {val} is not zero within tolerance"
                )


def index_form(inp: IndexFormInput) -> float:
    """(n-1) * int (y')^2 dr - int ric(r) y^2 dr over the conjugate interval.

    Strictly negative whenever ric exceeds (n-1) times the trajectory's own
    coefficient pointwise; zero in the equality case by the boundary identity.
    """
    y = inp.y
    if inp.ric.r_min > y.r_start:
        raise DomainMismatch(
            f"ric profile starts at {inp.ric.r_min}, needed from {y.r_start}"
        )
    qtol = max(1e-12, 0.01 * y.tol)

    def kinetic(r):
        return y.evaluate(r)[1] ** 2

    def potential(r):
        return inp.ric(r) * y.evaluate(r)[0] ** 2

    pts = y.grid[:: max(1, len(y.grid) // 40)][1:-1]
    k, _ = quad(kinetic, y.r_start, y.r_end, epsabs=qtol, epsrel=qtol,
                points=pts, limit=400)
    p, _ = quad(potential, y.r_start, y.r_end, epsabs=qtol, epsrel=qtol,
                points=pts, limit=400)
    return (inp.n - 1) * k - p


@dataclass(frozen=True)
class PiconeReport:
    """Worst-case defect of the comparison identity y'/y = w'/w - I(r)/w^2."""

    residual: float
    r_at_max: float
    window: tuple[float, float]
    y_second_zero: Optional[float]


def picone_residual(
    b: CurvatureProfile,
    c: CurvatureProfile,
    r_max: float,
    tol: float = 1e-9,
    panels_per_segment: int = 1200,
) -> PiconeReport:
    """Check the comparison identity between the solutions of b and c (c >= b).

    Both solutions start with value 0, slope 1 at the common left endpoint.
    I(r) accumulates int (c - b) w^2 plus int ((w' y - w y')/y)^2 by composite
    Simpson, with panel edges pinned to the profiles' breakpoints so jumps in
    c - b never sit inside a panel; the reported residual is the max over
    nodes of |y'/y - w'/w + I/w^2|.  Raises YVanished if y hits zero inside
    the window, which is the comparison theorem's conclusion, not a defect.
    """
    r_lo = max(b.r_min, c.r_min)
    wtraj = integrate_sl(b, r_lo, 0.0, 1.0, r_max, tol)
    ytraj = integrate_sl(c, r_lo, 0.0, 1.0, r_max, tol)
    if len(ytraj.zeros):
        raise YVanished(
            f"comparison solution vanished at r = {ytraj.zeros[0]:.6g}; "
            "shorten the window below that radius"
        )

    # Start a hair inside the interval to dodge the removable 0/0 at r_lo.
    start = r_lo + max(1e-3, 1e-4 * (r_max - r_lo))
    cuts = sorted(set(b.breakpoints) | set(c.breakpoints))
    edges = [start] + [x for x in cuts if start < x < r_max] + [r_max]

    worst = (0.0, start)
    integral = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        rs = np.linspace(lo, hi, 2 * panels_per_segment + 1)
        w, wp = wtraj.evaluate(rs)
        yv, yp = ytraj.evaluate(rs)
        # Evaluate the coefficient difference a hair inside the segment so a
        # jump sitting exactly on the edge is read from the correct side.
        rs_in = rs.copy()
        nudge = max(1e-12 * (hi - lo), 4.0 * np.spacing(hi))
        rs_in[0] += nudge
        rs_in[-1] -= nudge
        f = (c.values(rs_in) - b.values(rs_in)) * w**2 + ((wp * yv - w * yp) / yv) ** 2
        h = rs[1] - rs[0]
        inc = (h / 3.0) * (f[:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
        cum = integral + np.concatenate([[0.0], np.cumsum(inc)])
        even = slice(0, None, 2)
        resid = np.abs(yp[even] / yv[even] - wp[even] / w[even] + cum / w[even] ** 2)
        i = int(np.argmax(resid))
        if resid[i] > worst[0]:
            worst = (float(resid[i]), float(rs[even][i]))
        integral = float(cum[-1])

    return PiconeReport(
        residual=worst[0],
        r_at_max=worst[1],
        window=(float(start), float(r_max)),
        y_second_zero=None,
    )
