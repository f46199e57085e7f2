"""Classification of curvature profiles whose normalised Sturm-Liouville
solution is monotone and bounded, plus the boundary tests built on them.

Boundedness at infinity is not numerically decidable, so the classifier uses
a dyadic Cauchy-tail criterion with an explicit tail tolerance and keeps
"Inconclusive" as a first-class verdict.  Every verdict embeds the (r_max,
tol) it was computed with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import ExceedanceViolated
from .sl_engine import CurvatureProfile, integrate_sl

CLASS_BIFURCATOR = "Bifurcator"
CLASS_SECOND_ZERO = "NotBifurcator(SecondZero)"
CLASS_NON_MONOTONE = "NotBifurcator(NonMonotone)"
CLASS_UNBOUNDED = "NotBifurcator(Unbounded)"
CLASS_INCONCLUSIVE = "Inconclusive"


def arctan_profile() -> CurvatureProfile:
    """b(r) = 2r / ((1 + r^2)^2 arctan r), extended by continuity to b(0) = 2.

    The normalised solution is arctan(r): monotone, bounded by pi/2.
    """

    def f(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 2.0 * r / ((1.0 + r * r) ** 2 * np.arctan(r))
        out = np.where(r == 0.0, 2.0, out)
        return out if out.ndim else float(out)

    return CurvatureProfile(func=f, r_min=0.0, label="arctan-bifurcator")


@dataclass(frozen=True)
class BifurcatorReport:
    """Verdict plus the evidence the classifier saw.

    w_limit is the tail-corrected estimate w(R) + R w'(R) (exact up to
    O(R^-3) when the moment integral converges); cauchy_tail is the raw
    w(R) - w(R/2) the verdict was decided on.
    """

    classification: str
    w_limit: Optional[float]
    wp_at_rmax: float
    cauchy_tail: Optional[float]
    tail_tol: Optional[float]
    moment_integral: Optional[float] = None
    moment_tail_ratio: Optional[float] = None
    independent_solution_growth: Optional[str] = None
    detail: str = ""
    r_max: float = 0.0
    tol: float = 0.0


def classify(
    b: CurvatureProfile,
    r_max: float = 1e4,
    tol: float = 1e-9,
    eps: float = 1e-6,
    unbounded_cap: float = 1e6,
    tail_tol_rel: float = 1e-4,
) -> BifurcatorReport:
    """Integrate w'' + b w = 0, w(0) = 0, w'(0) = 1 and classify the profile.

    A zero beyond the start or a sign change of w' refutes the monotone
    bounded property outright; growth past unbounded_cap with the slope not
    collapsing reports Unbounded.  Monotone solutions whose dyadic Cauchy
    tail w(R) - w(R/2) falls below tail_tol_rel * w(R) are called Bifurcator;
    anything else is Inconclusive.  Profiles singular at the origin are
    started at eps with w(eps) = eps, w'(eps) = 1 (O(eps^2 b) initial error).
    """
    start = b.r_min
    if start == 0.0:
        try:
            v0 = b(0.0)
            if not math.isfinite(v0):
                start = eps
        except Exception:
            start = eps
    elif start > 0.0:
        start = max(start, eps)
    w0 = 0.0 if start == 0.0 else start
    traj = integrate_sl(b, start, w0, 1.0, r_max, tol)

    w_end = float(traj.w[-1])
    wp_end = float(traj.wp[-1])
    tail_tol = tail_tol_rel * abs(w_end)
    wm, _ = traj.evaluate(r_max / 2.0)
    cauchy = w_end - float(wm)
    w_limit = w_end + r_max * wp_end

    def report(cls, detail, limit=None):
        return BifurcatorReport(
            classification=cls,
            w_limit=limit,
            wp_at_rmax=wp_end,
            cauchy_tail=cauchy,
            tail_tol=tail_tol,
            detail=detail,
            r_max=r_max,
            tol=tol,
        )

    if len(traj.zeros):
        return report(CLASS_SECOND_ZERO, f"solution vanished at r = {traj.zeros[0]:.9g}")
    if len(traj.extrema):
        return report(
            CLASS_NON_MONOTONE, f"w' changed sign at r = {traj.extrema[0]:.9g}"
        )
    if np.max(traj.w) > unbounded_cap and wp_end > unbounded_cap / (10.0 * r_max):
        return report(
            CLASS_UNBOUNDED,
            f"w exceeded {unbounded_cap:g} with slope {wp_end:.3g} at r_max",
        )
    if cauchy <= tail_tol:
        return BifurcatorReport(
            classification=CLASS_BIFURCATOR,
            w_limit=w_limit,
            wp_at_rmax=wp_end,
            cauchy_tail=cauchy,
            tail_tol=tail_tol,
            detail="monotone; dyadic Cauchy tail below tolerance",
            r_max=r_max,
            tol=tol,
        )
    return report(
        CLASS_INCONCLUSIVE,
        f"monotone but Cauchy tail {cauchy:.3g} exceeds {tail_tol:.3g}; "
        "the solution may be slowly unbounded or r_max too small",
        limit=None,
    )


@dataclass(frozen=True)
class AbreschReport:
    """Diagnostics for the three structural properties of a bifurcator profile."""

    moment_integral: float
    moment_tail_ratio: float
    moment_converged: bool
    wp_at_rmax: float
    wp_loglog_slope: float
    independent_solution_value: float
    independent_diverges: bool
    wronskian_drift: float


def abresch_checks(b: CurvatureProfile, r_max: float = 1e4, tol: float = 1e-9) -> AbreschReport:
    """Moment integral, limit derivative trend, and second-solution growth.

    (a) int r b(r) dr over [r_min, r_max] by adaptive quadrature, with the
        ratio of the last two dyadic blocks as the tail-convergence estimate;
    (b) w'(r_max) and the log-log slope of w' over the last decade;
    (c) the reduction-of-order solution v = w int dr / w^2 started past the
        last breakpoint of b, reported divergent when |v| > 1e3 by r_max.
    """
    lo = max(b.r_min, 0.0)
    blocks = [r_max / 8.0, r_max / 4.0, r_max / 2.0, r_max]
    moment = 0.0
    vals = []
    pieces = [lo] + [x for x in sorted(b.breakpoints) if lo < x < blocks[0]] + blocks
    for a, c in zip(pieces[:-1], pieces[1:]):
        v, _ = quad(lambda r: r * b(r), a, c, epsabs=1e-12, epsrel=1e-10, limit=300)
        vals.append(v)
        moment += v
    tail_ratio = vals[-1] / vals[-2] if vals[-2] != 0.0 else math.inf

    start = b.r_min if b.r_min > 0 else (0.0 if math.isfinite(b(0.0)) else 1e-6)
    w0 = 0.0 if start == 0.0 else start
    traj = integrate_sl(b, start, w0, 1.0, r_max, tol)
    wp_end = float(traj.wp[-1])

    decade = np.geomspace(r_max / 10.0, r_max, 40)
    _, wps = traj.evaluate(decade)
    wps = np.abs(wps)
    slope = float(np.polyfit(np.log(decade), np.log(np.clip(wps, 1e-300, None)), 1)[0])

    # Reduction of order on [r_s, r_max]: v = w * int dr / w^2, v' = w' I + 1/w.
    r_s = max(start + 0.1, *(list(b.breakpoints) + [1.0]))
    rs = np.geomspace(r_s, r_max, 4001)
    w, wp = traj.evaluate(rs)
    integrand = 1.0 / w**2
    # cumulative trapezoid is enough here; the integrand is smooth and monotone
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(rs) * (integrand[1:] + integrand[:-1]))])
    v = w * cum
    vp = wp * cum + 1.0 / w
    wronskian = w * vp - wp * v
    drift = float(np.max(np.abs(wronskian - 1.0)))

    return AbreschReport(
        moment_integral=float(moment),
        moment_tail_ratio=float(tail_ratio),
        moment_converged=bool(tail_ratio < 1.0),
        wp_at_rmax=wp_end,
        wp_loglog_slope=slope,
        independent_solution_value=float(v[-1]),
        independent_diverges=bool(abs(v[-1]) > 1e3),
        wronskian_drift=drift,
    )


@dataclass(frozen=True)
class BoundaryVerdict:
    verdict: str  # "CompactSide" | "NoEvidence" | "NoncompactSide" | "NotApplicable"
    second_zero: Optional[float]
    detail: str
    r_max: float


def boundary_test(
    b: CurvatureProfile,
    c: CurvatureProfile,
    r_max: float = 1e4,
    tol: float = 1e-9,
    grid_size: int = 4000,
) -> BoundaryVerdict:
    """Compact-side test: does the solution for c (>= b) vanish again by r_max?

    Raises ExceedanceViolated if c dips below b anywhere on the check grid.
    NoEvidence does not refute compactness: the second zero is guaranteed to
    exist for a true exceedance but its location may be beyond r_max.
    """
    lo = max(b.r_min, c.r_min, 1e-9)
    rs = np.geomspace(lo, r_max, grid_size)
    bv, cv = b.values(rs), c.values(rs)
    low = cv < bv * (1.0 - 1e-12) - 1e-300
    if np.any(low):
        r_bad = rs[int(np.argmax(low))]
        raise ExceedanceViolated(
            f"comparison profile falls below the bifurcator at r = {r_bad:.9g}"
        )

    start = max(b.r_min, c.r_min)
    if start == 0.0 and not math.isfinite(c(0.0)):
        start = 1e-6
    w0 = 0.0 if start == 0.0 else start
    traj = integrate_sl(c, start, w0, 1.0, r_max, tol)
    if len(traj.zeros):
        r1 = float(traj.zeros[0])
        return BoundaryVerdict(
            verdict="CompactSide",
            second_zero=r1,
            detail=f"comparison solution vanished at r = {r1:.9g}",
            r_max=r_max,
        )
    state = "monotone" if not len(traj.extrema) else "past its maximum"
    return BoundaryVerdict(
        verdict="NoEvidence",
        second_zero=None,
        detail=(
            f"no second zero up to r_max = {r_max:g}; solution is {state} with "
            f"w = {traj.w[-1]:.6g}, w' = {traj.wp[-1]:.3g} at the end -- "
            "r_max may simply be too small to witness the guaranteed zero"
        ),
        r_max=r_max,
    )


def noncompact_side_check(
    profile_sup: CurvatureProfile,
    b: CurvatureProfile,
    r_max: float = 1e4,
    grid_size: int = 4000,
) -> BoundaryVerdict:
    """Noncompact-side test: is the supremal Ricci profile <= b on the grid?

    Also reports the liminf diagnostic min b over the last dyad [r_max/2, r_max].
    """
    lo = max(profile_sup.r_min, b.r_min, 1e-9)
    rs = np.geomspace(lo, r_max, grid_size)
    sup, bv = profile_sup.values(rs), b.values(rs)
    dyad = rs >= r_max / 2.0
    liminf_diag = float(np.min(bv[dyad]))
    if np.all(sup <= bv * (1.0 + 1e-12)):
        return BoundaryVerdict(
            verdict="NoncompactSide",
            second_zero=None,
            detail=f"sup-profile <= bifurcator on the grid; "
                   f"min b over the last dyad = {liminf_diag:.6g}",
            r_max=r_max,
        )
    r_bad = rs[int(np.argmax(sup > bv * (1.0 + 1e-12)))]
    return BoundaryVerdict(
        verdict="NotApplicable",
        second_zero=None,
        detail=f"sup-profile exceeds the bifurcator at r = {r_bad:.9g}; "
               f"min b over the last dyad = {liminf_diag:.6g}",
        r_max=r_max,
    )
