"""Bounded piecewise densities and the product-form law of composite IQI parameters.

A composite parameter of the form ``a = g1(theta) * g2(alpha) + c`` (theta and
alpha independent and uniformly bounded) has a density assembled from two or
three smooth segments.  The segment breakpoints are the mixed corner products
of the two component supports, and each segment's density is the truncated
product-convolution integral

    f(g) = integral over x of  f1(x) * f2(g / x) / x

taken over the overlap of the component supports.  ``product_pdf`` builds that
law for arbitrary components by adaptive quadrature; ``cos_theta_alpha_pdf``
ships the hand-derived logarithmic closed forms for the representative
parameter ``a = 1/2 + (1 + alpha) * cos(theta) / 2`` and is cross-checked
against the generic path in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

NORMALIZATION_TOL = 1e-8


class PdfError(ValueError):
    """Invalid density construction or evaluation request."""


def _quad(f, lo, hi, epsabs=1e-12, epsrel=1e-10) -> float:
    """Adaptive quadrature tolerant of integrable endpoint singularities.

    Values where the integrand is non-finite (a measure-zero set at segment
    edges) are treated as 0; an error estimate above 1e-6 raises, since every
    density here is smooth enough for far better.
    """

    def guarded(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = f(x)
        return v if np.isfinite(v) else 0.0

    out = quad(guarded, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200, full_output=1)
    value, abserr = out[0], out[1]
    if abserr > 1e-6 and abserr > 1e-4 * abs(value):
        raise PdfError(f"quadrature did not converge on [{lo}, {hi}]: err {abserr}")
    return value


# Width below which the sliver segment between the two mixed corner products
# is dropped entirely (exact two-segment structure).
_STRUCTURAL_EQ_TOL = 1e-12
# Tolerance on (1+alpha_m)cos(theta_m) vs (1-alpha_m) under which the law is
# *reported* as the boundary subcase.  Coarser than the structural tolerance
# on purpose: published parameter sets are rounded to a few digits.
_LABEL_EQ_TOL = 1e-3

SUBCASE_LT = "lt"  # g_min1*g_max2 < g_max1*g_min2 (middle segment: two-sided truncation)
SUBCASE_GT = "gt"  # g_min1*g_max2 > g_max1*g_min2 (middle segment: full-range plateau)
SUBCASE_EQ = "eq"  # mixed corner products coincide (two segments)


@dataclass(frozen=True)
class ComponentPdf:
    """Density of one monotone component over a bounded support."""

    density: Callable[[float], float]
    support: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.support
        if not hi > lo:
            raise PdfError(f"degenerate component support [{lo}, {hi}]")
        mass = _quad(self.density, lo, hi)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise PdfError(f"component density integrates to {mass}, not 1")


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    density: Callable


@dataclass(frozen=True)
class PiecewisePdf:
    """Piecewise density with eagerly cached segment masses.

    Segments must be contiguous and cover the support exactly; construction
    verifies non-negativity spot-wise and total mass 1 within 1e-8.
    """

    segments: tuple[Segment, ...]
    ref: str = "pdf"
    subcase: str | None = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise PdfError("empty segment list")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise PdfError(f"segments not contiguous at {a.hi} vs {b.lo}")
        masses = []
        for seg in self.segments:
            m = _quad(seg.density, seg.lo, seg.hi)
            if m < -1e-12:
                raise PdfError(f"negative mass {m} on segment [{seg.lo}, {seg.hi}]")
            masses.append(m)
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        if abs(cum[-1] - 1.0) > NORMALIZATION_TOL:
            raise PdfError(f"total mass {cum[-1]} not 1 within {NORMALIZATION_TOL}")
        object.__setattr__(self, "_cum", cum)

    @property
    def support(self) -> tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([s.lo for s in self.segments] + [self.segments[-1].hi])

    def pdf(self, x):
        """Density at ``x`` (0 outside the support); accepts scalars or arrays."""
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        x_arr = np.atleast_1d(x_arr)
        out = np.zeros_like(x_arr)
        lo, hi = self.support
        for seg in self.segments:
            mask = (x_arr >= seg.lo) & (x_arr <= seg.hi)
            if mask.any():
                vals = seg.density(x_arr[mask])
                out[mask] = np.asarray(vals, dtype=float)
        out[(x_arr < lo) | (x_arr > hi)] = 0.0
        return float(out[0]) if scalar else out

    def cdf(self, x: float) -> float:
        """Cumulative mass up to ``x``; clamped to [0, 1] outside the support."""
        lo, hi = self.support
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        for i, seg in enumerate(self.segments):
            if x <= seg.hi or i == len(self.segments) - 1:
                part = _quad(seg.density, seg.lo, min(x, seg.hi))
                return float(min(self._cum[i] + part, 1.0))
        raise AssertionError("unreachable")

    def inverse_cdf(self, p: float) -> float:
        """x with cdf(x) = p within 1e-10, by bracketed root finding."""
        if not -1e-12 <= p <= 1 + 1e-12:
            raise PdfError(f"probability {p} outside [0, 1]")
        p = min(max(p, 0.0), 1.0)
        lo, hi = self.support
        if p <= 0.0:
            return lo
        if p >= 1.0:
            return hi
        i = int(np.searchsorted(self._cum, p, side="right")) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        seg = self.segments[i]
        f = lambda x: self.cdf(x) - p
        flo, fhi = f(seg.lo), f(seg.hi)
        while flo > 0 and i > 0:  # roundoff pushed p across a join
            i -= 1
            seg = self.segments[i]
            flo, fhi = f(seg.lo), f(seg.hi)
        while fhi < 0 and i < len(self.segments) - 1:
            i += 1
            seg = self.segments[i]
            flo, fhi = f(seg.lo), f(seg.hi)
        if flo >= 0:
            return seg.lo
        if fhi <= 0:
            return seg.hi
        x = brentq(f, seg.lo, seg.hi, xtol=1e-15, rtol=8.9e-16)
        return float(x)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-transform samples (slow; meant for tests and small n)."""
        u = rng.random(n)
        return np.array([self.inverse_cdf(p) for p in u])

    def to_json_dict(self, n_points: int = 10_000) -> dict:
        lo, hi = self.support
        xs = np.linspace(lo, hi, n_points)
        return {
            "ref": self.ref,
            "subcase": self.subcase,
            "support": [lo, hi],
            "breakpoints": self.breakpoints.tolist(),
            "x": xs.tolist(),
            "density": np.asarray(self.pdf(xs), dtype=float).tolist(),
        }


def uniform_pdf(lo: float, hi: float, ref: str = "uniform") -> PiecewisePdf:
    if not hi > lo:
        raise PdfError(f"empty uniform support [{lo}, {hi}]")
    h = 1.0 / (hi - lo)
    return PiecewisePdf(
        (Segment(lo, hi, lambda x, h=h: np.full_like(np.asarray(x, float), h)),),
        ref=ref,
    )


def _classify(g1_lo, g1_hi, g2_lo, g2_hi):
    """Mixed-corner ordering: structural routing plus the reported label."""
    cross_lo = g1_lo * g2_hi
    cross_hi = g1_hi * g2_lo
    diff = cross_lo - cross_hi
    scale = max(abs(cross_lo), abs(cross_hi), 1e-300)
    if abs(diff) <= _STRUCTURAL_EQ_TOL * scale:
        structure = SUBCASE_EQ
    elif diff < 0:
        structure = SUBCASE_LT
    else:
        structure = SUBCASE_GT
    if abs(diff) <= _LABEL_EQ_TOL * scale:
        label = SUBCASE_EQ
    else:
        label = structure
    return structure, label, cross_lo, cross_hi


def product_pdf(f_g1: ComponentPdf, f_g2: ComponentPdf, c: float, ref: str = "product") -> PiecewisePdf:
    """Density of g1*g2 + c for independent components with positive supports.

    Segment breakpoints are the sorted mixed corner products; each segment's
    density is the truncated product integral evaluated by adaptive quadrature
    to absolute tolerance 1e-10.
    """
    g1_lo, g1_hi = f_g1.support
    g2_lo, g2_hi = f_g2.support
    if g1_lo <= 0 or g2_lo <= 0:
        raise PdfError(
            "product transformation requires strictly positive component supports"
        )
    structure, label, cross_lo, cross_hi = _classify(g1_lo, g1_hi, g2_lo, g2_hi)
    d1, d2 = f_g1.density, f_g2.density

    def density_at(a):
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.empty_like(a_arr)
        for i, av in enumerate(a_arr):
            g = av - c
            lo = max(g1_lo, g / g2_hi)
            hi = min(g1_hi, g / g2_lo)
            if hi <= lo:
                out[i] = 0.0
                continue
            out[i] = _quad(
                lambda x: d1(x) * d2(g / x) / x, lo, hi, epsabs=1e-10
            )
        return out if np.asarray(a).ndim else float(out[0])

    lo_mid, hi_mid = min(cross_lo, cross_hi), max(cross_lo, cross_hi)
    cuts = [g1_lo * g2_lo, lo_mid, hi_mid, g1_hi * g2_hi]
    if structure == SUBCASE_EQ:
        cuts = [cuts[0], 0.5 * (lo_mid + hi_mid), cuts[-1]]
    segments = tuple(
        Segment(a + c, b + c, density_at) for a, b in zip(cuts, cuts[1:]) if b > a
    )
    return PiecewisePdf(segments, ref=ref, subcase=label)


def cos_theta_alpha_pdf(theta_m: float, alpha_m: float) -> PiecewisePdf:
    """Closed-form law of a = 1/2 + (1 + alpha) cos(theta) / 2.

    theta ~ U(-theta_m, theta_m) and alpha ~ U(-alpha_m, alpha_m) independent.
    The component laws are 1 / (theta_m * sqrt(1 - x^2)) on [cos theta_m, 1]
    and 1 / alpha_m on [(1 - alpha_m)/2, (1 + alpha_m)/2]; the product law has
    logarithmic segment densities assembled by the mixed-corner ordering of
    (1 + alpha_m) cos(theta_m) versus (1 - alpha_m).
    """
    if not 0 < theta_m < np.pi / 2:
        raise PdfError(f"theta_m {theta_m} outside (0, pi/2)")
    if not 0 < alpha_m < 1:
        raise PdfError(f"alpha_m {alpha_m} outside (0, 1)")
    tm, am = float(theta_m), float(alpha_m)
    ct = np.cos(tm)
    c = 0.5
    norm = 1.0 / (tm * am)
    a_lo, a_hi = (1 - am) / 2, (1 + am) / 2  # support of (1 + alpha)/2

    def _sq(v):
        return np.sqrt(np.maximum(v, 0.0))

    def seg_rise(x):  # lower tail: truncated below by cos(theta_m)
        g = np.asarray(x, float) - c
        num = g / ct + _sq((g / ct) ** 2 - g**2)
        den = a_lo + _sq(a_lo**2 - g**2)
        return norm * np.log(num / den)

    def seg_mid_lt(x):  # middle when (1+am)cos(tm) < 1-am: truncated both sides
        g = np.asarray(x, float) - c
        num = a_hi + _sq(a_hi**2 - g**2)
        den = a_lo + _sq(a_lo**2 - g**2)
        return norm * np.log(num / den)

    def seg_fall(x):  # upper tail: truncated above by 1
        g = np.asarray(x, float) - c
        u = a_hi / g
        return norm * np.log(u + _sq(u**2 - 1.0))

    def seg_plateau(x):  # middle when (1+am)cos(tm) > 1-am: full-range constant
        val = norm * np.log(1.0 / ct + np.sqrt(1.0 / ct**2 - 1.0))
        return np.full_like(np.asarray(x, float), val)

    structure, label, cross_lo, cross_hi = _classify(ct, 1.0, a_lo, a_hi)
    lo_mid, hi_mid = min(cross_lo, cross_hi), max(cross_lo, cross_hi)
    g0, g3 = ct * a_lo, a_hi
    if structure == SUBCASE_EQ:
        mid = 0.5 * (lo_mid + hi_mid)
        segs = (
            Segment(g0 + c, mid + c, seg_rise),
            Segment(mid + c, g3 + c, seg_fall),
        )
    else:
        mid_fn = seg_mid_lt if structure == SUBCASE_LT else seg_plateau
        segs = (
            Segment(g0 + c, lo_mid + c, seg_rise),
            Segment(lo_mid + c, hi_mid + c, mid_fn),
            Segment(hi_mid + c, g3 + c, seg_fall),
        )
    return PiecewisePdf(
        segs, ref=f"cos-theta-alpha[{tm:.6g},{am:.6g}]", subcase=label
    )


def theta_component_pdf(theta_m: float) -> ComponentPdf:
    """Law of cos(theta) for theta ~ U(-theta_m, theta_m), 0 < theta_m < pi/2."""
    if not 0 < theta_m < np.pi / 2:
        raise PdfError(f"theta_m {theta_m} outside (0, pi/2)")
    tm = float(theta_m)

    def dens(x):
        return 1.0 / (tm * np.sqrt(1.0 - np.asarray(x, float) ** 2))

    return ComponentPdf(dens, (np.cos(tm), 1.0))


def alpha_component_pdf(alpha_m: float) -> ComponentPdf:
    """Law of (1 + alpha)/2 for alpha ~ U(-alpha_m, alpha_m), 0 < alpha_m < 1."""
    if not 0 < alpha_m < 1:
        raise PdfError(f"alpha_m {alpha_m} outside (0, 1)")
    am = float(alpha_m)

    def dens(x):
        return np.full_like(np.asarray(x, float), 1.0 / am)

    return ComponentPdf(dens, ((1 - am) / 2, (1 + am) / 2))
