import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from phyndn.pdfs import (
    ComponentPdf,
    PdfError,
    PiecewisePdf,
    Segment,
    alpha_component_pdf,
    cos_theta_alpha_pdf,
    product_pdf,
    theta_component_pdf,
    uniform_pdf,
)

WORKED_THETA_M = 5 * math.pi / 36
WORKED_ALPHA_M = 0.04

FIG3_PARAMS = [
    (5 * math.pi / 36, 0.04, "lt"),
    (math.pi / 12, 0.1, "gt"),
    (math.pi / 6, 0.0718, "eq"),
]


def sample_composite(theta_m, alpha_m, n, rng):
    th = rng.uniform(-theta_m, theta_m, n)
    al = rng.uniform(-alpha_m, alpha_m, n)
    return 0.5 + 0.5 * (1 + al) * np.cos(th)


class TestUniformPdf:
    def test_cdf_trivials(self):
        pdf = uniform_pdf(0.0, 1.0)
        assert pdf.cdf(0.3) == pytest.approx(0.3, abs=1e-10)
        assert pdf.cdf(0.0) == 0.0
        assert pdf.cdf(1.0) == 1.0

    def test_inverse_trivials(self):
        pdf = uniform_pdf(-1.0, 1.0)
        assert pdf.inverse_cdf(0.75) == pytest.approx(0.5, abs=1e-9)
        assert pdf.inverse_cdf(0.0) == -1.0
        assert pdf.inverse_cdf(1.0) == 1.0

    def test_bad_support(self):
        with pytest.raises(PdfError):
            uniform_pdf(1.0, 1.0)


class TestComponentPdf:
    def test_theta_component_normalized(self):
        comp = theta_component_pdf(WORKED_THETA_M)
        mass, _ = quad(comp.density, *comp.support)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_rejects_unnormalized(self):
        with pytest.raises(PdfError):
            ComponentPdf(lambda x: np.full_like(np.asarray(x, float), 2.0), (0.0, 1.0))

    def test_rejects_degenerate_support(self):
        with pytest.raises(PdfError):
            ComponentPdf(lambda x: 1.0, (1.0, 1.0))


class TestProductPdf:
    def test_product_of_uniforms_closed_form(self):
        # independent U(1,2) factors: density ln(min(x,2)/max(x/2,1)) on [1,4]
        u12 = ComponentPdf(
            lambda x: np.full_like(np.asarray(x, float), 1.0), (1.0, 2.0)
        )
        pdf = product_pdf(u12, u12, c=0.0)
        assert pdf.support == pytest.approx((1.0, 4.0))
        xs = np.linspace(1.0 + 1e-9, 4.0 - 1e-9, 400)
        expected = np.log(np.minimum(xs, 2.0) / np.maximum(xs / 2.0, 1.0))
        got = pdf.pdf(xs)
        assert np.max(np.abs(got - expected)) < 1e-6

    def test_rejects_nonpositive_support(self):
        sym = ComponentPdf(
            lambda x: np.full_like(np.asarray(x, float), 0.5), (-1.0, 1.0)
        )
        pos = ComponentPdf(lambda x: np.full_like(np.asarray(x, float), 1.0), (1.0, 2.0))
        with pytest.raises(PdfError):
            product_pdf(sym, pos, c=0.0)

    def test_generic_matches_closed_forms_on_grid(self):
        # hand-derived logarithmic forms against the quadrature path
        generic = product_pdf(
            theta_component_pdf(WORKED_THETA_M),
            alpha_component_pdf(WORKED_ALPHA_M),
            c=0.5,
        )
        closed = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        lo, hi = closed.support
        xs = np.linspace(lo + 1e-9, hi - 1e-9, 1000)
        diff = np.abs(generic.pdf(xs) - closed.pdf(xs))
        assert diff.max() < 1e-6

    @pytest.mark.parametrize("theta_m,alpha_m,expected", FIG3_PARAMS)
    def test_subcase_selection(self, theta_m, alpha_m, expected):
        generic = product_pdf(
            theta_component_pdf(theta_m), alpha_component_pdf(alpha_m), c=0.5
        )
        closed = cos_theta_alpha_pdf(theta_m, alpha_m)
        assert generic.subcase == expected
        assert closed.subcase == expected

    def test_boundary_subcase_condition(self):
        # rounded published parameters sit within 1e-3 of exact corner equality
        theta_m, alpha_m = math.pi / 6, 0.0718
        assert abs((1 + alpha_m) * math.cos(theta_m) - (1 - alpha_m)) < 1e-3
        assert cos_theta_alpha_pdf(theta_m, alpha_m).subcase == "eq"

    def test_plateau_middle_segment(self):
        # for pi/12, 0.1 the middle segment density has no x-dependence
        pdf = cos_theta_alpha_pdf(math.pi / 12, 0.1)
        assert pdf.subcase == "gt"
        mids = [s for s in pdf.segments]
        assert len(mids) == 3
        seg = mids[1]
        xs = np.linspace(seg.lo + 1e-9, seg.hi - 1e-9, 50)
        vals = seg.density(xs)
        assert np.ptp(vals) < 1e-12


class TestCosThetaAlphaPdf:
    def test_support_corners(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        a_min = 0.5 + 0.5 * (1 - WORKED_ALPHA_M) * math.cos(WORKED_THETA_M)
        a_max = 0.5 + 0.5 * (1 + WORKED_ALPHA_M)
        assert pdf.support == pytest.approx((a_min, a_max), abs=1e-12)

    def test_normalization(self):
        for theta_m, alpha_m, _ in FIG3_PARAMS:
            pdf = cos_theta_alpha_pdf(theta_m, alpha_m)
            assert pdf._cum[-1] == pytest.approx(1.0, abs=1e-8)

    def test_cdf_endpoints(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        lo, hi = pdf.support
        assert pdf.cdf(lo) == 0.0
        assert pdf.cdf(hi) == 1.0
        assert pdf.cdf(lo - 1.0) == 0.0
        assert pdf.cdf(hi + 1.0) == 1.0

    def test_cdf_monotone(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        lo, hi = pdf.support
        xs = np.linspace(lo, hi, 200)
        cdfs = [pdf.cdf(x) for x in xs]
        assert all(b >= a for a, b in zip(cdfs, cdfs[1:]))

    def test_median_round_trip(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        med = pdf.inverse_cdf(0.5)
        assert pdf.cdf(med) == pytest.approx(0.5, abs=1e-8)

    def test_median_against_monte_carlo(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        med = pdf.inverse_cdf(0.5)
        rng = np.random.default_rng(20240817)
        n = 1_000_000
        samples = sample_composite(WORKED_THETA_M, WORKED_ALPHA_M, n, rng)
        emp = np.median(samples)
        # Monte Carlo standard error of the sample median
        se = 1.0 / (2.0 * pdf.pdf(med) * math.sqrt(n))
        assert abs(emp - med) < 3 * se

    def test_inverse_cdf_residual(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        for p in (0.001, 0.1, 0.37, 0.5, 0.82, 0.999):
            x = pdf.inverse_cdf(p)
            assert abs(pdf.cdf(x) - p) < 1e-10

    def test_round_trip_interior(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        lo, hi = pdf.support
        for x in np.linspace(lo + 1e-4, hi - 1e-4, 17):
            assert pdf.inverse_cdf(pdf.cdf(x)) == pytest.approx(x, abs=1e-8)

    def test_parameter_validation(self):
        with pytest.raises(PdfError):
            cos_theta_alpha_pdf(0.0, 0.04)
        with pytest.raises(PdfError):
            cos_theta_alpha_pdf(math.pi / 2, 0.04)
        with pytest.raises(PdfError):
            cos_theta_alpha_pdf(0.4, 1.5)

    @pytest.mark.parametrize(
        "theta_m,alpha_m,seed",
        [
            (WORKED_THETA_M, WORKED_ALPHA_M, 42),
            # arbitrary legal pairs away from the published parameter sets
            (0.2916, 0.3875, 31337),
            (1.2719, 0.1146, 31340),
        ],
    )
    def test_chi_square_goodness_of_fit(self, theta_m, alpha_m, seed):
        # 1e5 simulated parameters vs the analytic law, 50 equal-mass bins
        pdf = cos_theta_alpha_pdf(theta_m, alpha_m)
        rng = np.random.default_rng(seed)
        n = 100_000
        samples = sample_composite(theta_m, alpha_m, n, rng)
        edges = [pdf.support[0]]
        edges += [pdf.inverse_cdf(k / 50) for k in range(1, 50)]
        edges += [pdf.support[1]]
        observed, _ = np.histogram(samples, bins=edges)
        expected = n / 50
        chi2 = float(((observed - expected) ** 2 / expected).sum())
        assert chi2 < stats.chi2.ppf(0.99, 49)


class TestSerialization:
    def test_json_dict_shape(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        doc = pdf.to_json_dict()
        assert doc["support"] == pytest.approx(list(pdf.support))
        assert len(doc["x"]) == 10_000
        assert len(doc["density"]) == 10_000
        assert doc["subcase"] == "lt"
        assert len(doc["breakpoints"]) == 4

    def test_density_table_nonnegative(self):
        pdf = cos_theta_alpha_pdf(WORKED_THETA_M, WORKED_ALPHA_M)
        doc = pdf.to_json_dict(n_points=512)
        assert min(doc["density"]) >= 0.0


class TestPiecewiseValidation:
    def test_rejects_gap(self):
        segs = (
            Segment(0.0, 0.4, lambda x: np.full_like(np.asarray(x, float), 1.0)),
            Segment(0.6, 1.0, lambda x: np.full_like(np.asarray(x, float), 1.0)),
        )
        with pytest.raises(PdfError):
            PiecewisePdf(segs)

    def test_rejects_unnormalized(self):
        segs = (Segment(0.0, 2.0, lambda x: np.full_like(np.asarray(x, float), 1.0)),)
        with pytest.raises(PdfError):
            PiecewisePdf(segs)
