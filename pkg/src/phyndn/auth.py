"""Online two-step authentication of claimed PHY identities.

Step 1 quantizes the mean of the online estimates and compares interval
indices against the whitelist record.  Step 2 runs a hypothesis test on the
offset samples y[k] = a_hat[k] - a_registered: a one-sided Gaussian mean test
when the estimation-noise variance is known, or a variance-free ratio test
(distributed F(1, N_s - 1) under the null) when it is not.  Both thresholds
are calibrated to a required false-alarm rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc, gammaln, ndtr, ndtri

from .quantizer import PhyId, QuantizerSpec, phy_id


class AuthError(ValueError):
    pass


class Decision(enum.Enum):
    H0_SAME_DEVICE = "h0_same_device"
    H1_DIFFERENT_DEVICE = "h1_different_device"


class TestKind(enum.Enum):
    NP = "np"
    NP_UNKNOWN_OFFSET = "np_unknown_offset"
    GLRT = "glrt"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    threshold: float
    decision: Decision
    test_kind: TestKind

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["decision"] = self.decision.value
        d["test_kind"] = self.test_kind.value
        return d


@dataclass(frozen=True)
class TestConfig:
    """Step-2 configuration: required false-alarm rate and what is known."""

    rho: float
    sigma_known: float | None = None
    a_delta_known: float | None = None

    def __post_init__(self):
        if not 0 < self.rho <= 0.5:
            raise AuthError(f"rho {self.rho} outside (0, 0.5]")
        if self.sigma_known is not None and self.sigma_known <= 0:
            raise AuthError("sigma_known must be positive when given")


def offsets(a_registered: float, observations: np.ndarray) -> np.ndarray:
    """Elementwise offsets of online estimates from the registered value."""
    obs = np.asarray(observations, dtype=float)
    if obs.size == 0:
        raise AuthError("need at least one observation")
    return obs - a_registered


def _check_rho(rho: float):
    if not 0 < rho < 1:
        raise AuthError(f"rho {rho} outside (0, 1)")


def np_test(
    y: np.ndarray, sigma: float, a_delta: float | None, rho: float
) -> TestResult:
    """One-sided mean test on the offsets with known noise level.

    With a known offset the statistic is r * sum(y) / (a_delta * N_s) against
    the threshold Qinv(rho) * sqrt(r / N_s), r = a_delta^2 / sigma^2.  Without
    it the statistic is the plain sample mean against sigma/sqrt(N_s) *
    Qinv(rho); the two forms reach identical decisions for positive offsets.
    Exceeding the threshold declares the devices different.
    """
    _check_rho(rho)
    if sigma <= 0:
        raise AuthError("sigma must be positive")
    y = np.asarray(y, dtype=float)
    if y.size < 1:
        raise AuthError("need at least one offset sample")
    n_s = y.size
    q_inv = -ndtri(rho)
    if a_delta is not None and a_delta != 0.0:
        r = a_delta**2 / sigma**2
        stat = r * y.sum() / (a_delta * n_s)
        threshold = q_inv * math.sqrt(r / n_s)
        kind = TestKind.NP
    else:
        stat = y.mean()
        threshold = sigma / math.sqrt(n_s) * q_inv
        kind = TestKind.NP_UNKNOWN_OFFSET
    decision = (
        Decision.H1_DIFFERENT_DEVICE if stat > threshold else Decision.H0_SAME_DEVICE
    )
    return TestResult(float(stat), float(threshold), decision, kind)


def np_diff_rate(r: float, n_s: int, rho: float) -> float:
    """Detection probability of the known-noise mean test.

    Closed form Q(sqrt(r * N_s) * (b_v / r - 1)) with b_v the rho-calibrated
    threshold; increasing in r, N_s, and rho.
    """
    _check_rho(rho)
    if r <= 0:
        raise AuthError("r must be positive")
    b_v = -ndtri(rho) * math.sqrt(r / n_s)
    return float(ndtr(-math.sqrt(r * n_s) * (b_v / r - 1.0)))


@lru_cache(maxsize=4096)
def glrt_threshold(n_s: int, rho: float) -> float:
    """Threshold b_v with null exceedance rho for the variance-free statistic.

    Solves rho = 1 - I_{b/(b + N_s - 1)}(1/2, (N_s - 1)/2) (regularized
    incomplete beta) by bracketed root search; depends on (N_s, rho) only.
    """
    _check_rho(rho)
    if n_s < 2:
        raise AuthError("need at least 2 samples")
    nu = n_s - 1

    def surv_minus_rho(b):
        return 1.0 - betainc(0.5, nu / 2.0, b / (b + nu)) - rho

    lo, hi = 0.0, 1e6
    while surv_minus_rho(hi) > 0:
        hi *= 10.0
        if hi > 1e15:
            raise AuthError(f"threshold solve diverged for n_s={n_s}, rho={rho}")
    return float(brentq(surv_minus_rho, lo, hi, rtol=1e-12, maxiter=200))


def glrt_statistic(y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    n_s = y.size
    s = y.sum()
    ssq = ((y - s / n_s) ** 2).sum()
    if ssq == 0.0:
        # all offsets identical: probability-zero under the model
        return 0.0 if s == 0.0 else math.inf
    return float((n_s - 1) * s**2 / (n_s * ssq))


def glrt_test(y: np.ndarray, rho: float) -> TestResult:
    """Variance-free ratio test on the offsets; scale-invariant in y."""
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        raise AuthError("need at least 2 samples for the variance-free test")
    threshold = glrt_threshold(y.size, rho)
    stat = glrt_statistic(y)
    decision = (
        Decision.H1_DIFFERENT_DEVICE if stat > threshold else Decision.H0_SAME_DEVICE
    )
    return TestResult(stat, threshold, decision, TestKind.GLRT)


def glrt_diff_rate(a_delta: float, sigma: float, n_s: int, rho: float) -> float:
    """Detection probability of the variance-free test at offset a_delta.

    The statistic is noncentral-F(1, N_s - 1) with noncentrality
    N_s * a_delta^2 / sigma^2 under the alternative; the exceedance of the
    rho-calibrated threshold is a Poisson mixture of regularized incomplete
    betas, summed here until the residual Poisson mass is below 1e-12.
    Degenerates to rho itself as a_delta -> 0.
    """
    _check_rho(rho)
    if sigma <= 0 or n_s < 2:
        raise AuthError("need positive sigma and at least 2 samples")
    b_v = glrt_threshold(n_s, rho)
    nu = n_s - 1
    lam_half = 0.5 * n_s * a_delta**2 / sigma**2
    p = b_v / (b_v + nu)
    if lam_half == 0.0:
        return rho
    i_max = int(lam_half + 12.0 * math.sqrt(lam_half + 2.0) + 60)
    i = np.arange(i_max + 1)
    log_w = -lam_half + i * math.log(lam_half) - gammaln(i + 1)
    w = np.exp(log_w)
    cdf_terms = betainc(0.5 + i, nu / 2.0, p)
    acc = float(np.sum(w * cdf_terms))
    # remaining Poisson mass bounds the truncation error of the mixture CDF
    acc += max(0.0, 1.0 - float(w.sum()))
    return float(min(max(1.0 - acc, 0.0), 1.0))


class AuthDecision(enum.Enum):
    ACCEPT = "accept"
    REJECT_STEP1 = "reject_step1"
    REJECT_STEP2 = "reject_step2"
    UNKNOWN_ID = "unknown_id"


@dataclass(frozen=True)
class PhyRecord:
    """Whitelist entry for one registered device.

    ``epsilon`` is the identity-disambiguation offset applied when another
    device already holds the same quantization level; the identity is always
    recomputable as phy_id(level, version, epsilon).
    """

    a_registered: float
    interval_index: int
    level: float
    phy_id: PhyId
    registered_at: float = 0.0
    device_id: str = ""
    epsilon: float = 0.0


def make_record(
    spec: QuantizerSpec,
    a_registered: float,
    device_id: str = "",
    registered_at: float = 0.0,
    epsilon: float = 0.0,
) -> PhyRecord:
    idx, level = spec.quantize(a_registered)
    return PhyRecord(
        a_registered=float(a_registered),
        interval_index=idx,
        level=level,
        phy_id=phy_id(level, spec.version, epsilon),
        registered_at=registered_at,
        device_id=device_id,
        epsilon=epsilon,
    )


# identity offset between devices registered at the same quantization level
REGISTRATION_EPSILON = 1e-9


def build_whitelist(
    spec: QuantizerSpec,
    entries: list[tuple[float, str, float]],
    epsilon_step: float = REGISTRATION_EPSILON,
) -> tuple[dict[str, PhyRecord], int]:
    """Register (a_registered, device_id, registered_at) entries in order.

    Devices landing on an occupied quantization level get the next multiple
    of ``epsilon_step`` as their identity offset, so every device holds a
    distinct public identity even inside a shared interval.  Returns the
    whitelist and the count of such level collisions.
    """
    occupancy: dict[int, int] = {}
    whitelist: dict[str, PhyRecord] = {}
    collisions = 0
    for a_reg, device_id, registered_at in entries:
        idx, _ = spec.quantize(a_reg)
        k = occupancy.get(idx, 0)
        occupancy[idx] = k + 1
        if k > 0:
            collisions += 1
        rec = make_record(
            spec, a_reg, device_id, registered_at, epsilon=k * epsilon_step
        )
        whitelist[rec.phy_id.display] = rec
    return whitelist, collisions


def two_step_authenticate(
    claimed_id: PhyId,
    observations: np.ndarray,
    whitelist: Mapping[str, PhyRecord],
    spec: QuantizerSpec,
    config: TestConfig,
) -> AuthDecision:
    """Authenticate a claimed identity against online estimates.

    Looks up the claimed identity, compares the quantized mean of the
    observations with the record's interval (step 1), then tests the offsets
    (step 2) with the mean test when the noise level is known and the
    variance-free test otherwise.
    """
    record = whitelist.get(claimed_id.display)
    if record is None:
        return AuthDecision.UNKNOWN_ID
    obs = np.asarray(observations, dtype=float)
    if obs.size == 0:
        raise AuthError("need at least one observation")
    idx, _ = spec.quantize(float(obs.mean()))
    if idx != record.interval_index:
        return AuthDecision.REJECT_STEP1
    y = offsets(record.a_registered, obs)
    if config.sigma_known is not None:
        result = np_test(y, config.sigma_known, config.a_delta_known, config.rho)
    else:
        result = glrt_test(y, config.rho)
    if result.decision is Decision.H1_DIFFERENT_DEVICE:
        return AuthDecision.REJECT_STEP2
    return AuthDecision.ACCEPT


def separate_records(
    spec: QuantizerSpec,
    whitelist: Mapping[str, PhyRecord],
    rec_a: PhyRecord,
    rec_b: PhyRecord,
) -> tuple[QuantizerSpec, dict[str, PhyRecord]]:
    """Split the interval shared by two differentiated devices.

    Inserts the midpoint sub-boundary between their registered values and
    re-registers every whitelist record under the bumped quantizer version,
    so all identities refresh and the pair now quantizes apart.  A pair
    member not yet in the whitelist is registered alongside the rest.
    """
    new_spec = spec.insert_sub_boundary(rec_a.a_registered, rec_b.a_registered)
    records = list(whitelist.values())
    for rec in (rec_a, rec_b):
        if not any(r.device_id == rec.device_id for r in records):
            records.append(rec)
    new_whitelist, _ = build_whitelist(
        new_spec,
        [(r.a_registered, r.device_id, r.registered_at) for r in records],
    )
    return new_spec, new_whitelist
