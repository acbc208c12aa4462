"""Transmitter IQ-imbalance profiles, received-signal synthesis, and noisy
observations of the composite parameter.

An IoT transmitter is characterized by its amplitude mismatch alpha and phase
mismatch theta, both uniformly bounded by manufacturing limits.  Estimators at
the edge device reduce the pair to a scalar composite parameter ``a``; online
estimates arrive through the additive-Gaussian channel ``a_hat = a + n`` with
noise standard deviation sigma.  Waveform synthesis exists to generate test
vectors for the signal model and is not on the authentication path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class PopulationBounds:
    """Manufacturing limits: |theta| <= theta_m, |alpha| <= alpha_m."""

    theta_m: float
    alpha_m: float

    def __post_init__(self):
        if not 0 < self.theta_m < math.pi / 2:
            raise SignalError(f"theta_m {self.theta_m} outside (0, pi/2)")
        if not 0 < self.alpha_m < 1:
            raise SignalError(f"alpha_m {self.alpha_m} outside (0, 1)")


@dataclass(frozen=True)
class IqiProfile:
    """Ground-truth RF imperfections of one transmitter."""

    alpha: float
    theta: float
    device_id: str = ""

    def within(self, bounds: PopulationBounds) -> bool:
        return abs(self.alpha) <= bounds.alpha_m and abs(self.theta) <= bounds.theta_m


def sample_parameters(
    bounds: PopulationBounds, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """n i.i.d. (theta, alpha) pairs, each uniform over its bounded range."""
    thetas = rng.uniform(-bounds.theta_m, bounds.theta_m, n)
    alphas = rng.uniform(-bounds.alpha_m, bounds.alpha_m, n)
    return thetas, alphas


def sample_profiles(
    bounds: PopulationBounds, n: int, rng: np.random.Generator, prefix: str = "ed"
) -> list[IqiProfile]:
    thetas, alphas = sample_parameters(bounds, n, rng)
    return [
        IqiProfile(alpha=float(a), theta=float(t), device_id=f"{prefix}{i:05d}")
        for i, (t, a) in enumerate(zip(thetas, alphas))
    ]


class ParamKind(enum.Enum):
    DIRECT_THETA = "theta"
    DIRECT_ALPHA = "alpha"
    PRODUCT = "product"


@dataclass(frozen=True)
class CompositeParamSpec:
    """How an estimator condenses (theta, alpha) into the scalar parameter.

    For PRODUCT kind, a = g_theta(theta) * g_alpha(alpha) + c with each
    component bound to its own variable; the stored component ranges are the
    images of the bounded theta/alpha ranges and determine the a-support via
    the corner products.
    """

    kind: ParamKind
    g_theta: Callable[[float], float] | None = None
    g_alpha: Callable[[float], float] | None = None
    c: float = 0.0
    g_theta_range: tuple[float, float] | None = None
    g_alpha_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind is ParamKind.PRODUCT:
            if self.g_theta is None or self.g_alpha is None:
                raise SignalError("PRODUCT spec needs both component functions")
            if self.g_theta_range is None or self.g_alpha_range is None:
                raise SignalError("PRODUCT spec needs both component ranges")

    def a_range(self, bounds: PopulationBounds) -> tuple[float, float]:
        if self.kind is ParamKind.DIRECT_THETA:
            return -bounds.theta_m, bounds.theta_m
        if self.kind is ParamKind.DIRECT_ALPHA:
            return -bounds.alpha_m, bounds.alpha_m
        t_lo, t_hi = self.g_theta_range
        a_lo, a_hi = self.g_alpha_range
        corners = [t_lo * a_lo, t_lo * a_hi, t_hi * a_lo, t_hi * a_hi]
        return min(corners) + self.c, max(corners) + self.c


def half_cosine_spec(bounds: PopulationBounds) -> CompositeParamSpec:
    """The representative composite a = 1/2 + (1 + alpha) cos(theta) / 2."""
    return CompositeParamSpec(
        kind=ParamKind.PRODUCT,
        g_theta=np.cos,
        g_alpha=lambda a: 0.5 * (1.0 + a),
        c=0.5,
        g_theta_range=(math.cos(bounds.theta_m), 1.0),
        g_alpha_range=(0.5 * (1 - bounds.alpha_m), 0.5 * (1 + bounds.alpha_m)),
    )


def composite_a(profile: IqiProfile, spec: CompositeParamSpec) -> float:
    if spec.kind is ParamKind.DIRECT_THETA:
        return float(profile.theta)
    if spec.kind is ParamKind.DIRECT_ALPHA:
        return float(profile.alpha)
    return float(spec.g_theta(profile.theta) * spec.g_alpha(profile.alpha) + spec.c)


def composite_a_many(
    thetas: np.ndarray, alphas: np.ndarray, spec: CompositeParamSpec
) -> np.ndarray:
    if spec.kind is ParamKind.DIRECT_THETA:
        return np.asarray(thetas, float)
    if spec.kind is ParamKind.DIRECT_ALPHA:
        return np.asarray(alphas, float)
    return spec.g_theta(np.asarray(thetas)) * spec.g_alpha(np.asarray(alphas)) + spec.c


@dataclass(frozen=True)
class Observation:
    """One (possibly averaged) estimate of a device's composite parameter."""

    a_hat: float
    sigma: float
    source_device: str = ""


def observe(
    profile: IqiProfile,
    spec: CompositeParamSpec,
    sigma: float,
    rng: np.random.Generator,
) -> Observation:
    """Single noisy estimate a_hat = a + N(0, sigma^2)."""
    if sigma < 0:
        raise SignalError("sigma must be non-negative")
    a = composite_a(profile, spec)
    noise = rng.normal(0.0, sigma) if sigma > 0 else 0.0
    return Observation(a_hat=a + noise, sigma=sigma, source_device=profile.device_id)


def observe_many(
    profile: IqiProfile,
    spec: CompositeParamSpec,
    sigma: float,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    if sigma < 0:
        raise SignalError("sigma must be non-negative")
    a = composite_a(profile, spec)
    if sigma == 0:
        return np.full(n, a)
    return a + rng.normal(0.0, sigma, n)


def register_offline(
    profile: IqiProfile,
    spec: CompositeParamSpec,
    sigma: float,
    n_samples: int,
    rng: np.random.Generator,
) -> Observation:
    """Offline registration estimate: the mean of n_samples observations.

    Averaging models the offline noise elimination; the recorded noise level
    is sigma / sqrt(n_samples).
    """
    if n_samples < 1:
        raise SignalError("n_samples must be at least 1")
    if sigma == 0:
        return Observation(
            a_hat=composite_a(profile, spec), sigma=0.0, source_device=profile.device_id
        )
    samples = observe_many(profile, spec, sigma, n_samples, rng)
    return Observation(
        a_hat=float(samples.mean()),
        sigma=sigma / math.sqrt(n_samples),
        source_device=profile.device_id,
    )


@dataclass(frozen=True)
class ReceivedSignal:
    samples: np.ndarray
    impulse_response: np.ndarray
    tx_profile: IqiProfile
    rx_constants: tuple[complex, complex]


def synthesize_received(
    x: np.ndarray,
    h: np.ndarray,
    profile: IqiProfile,
    rx: tuple[complex, complex] = (1.0, 0.0),
) -> ReceivedSignal:
    """Push a symbol vector through TX IQ imbalance, the channel, and RX mixing.

    The transmit distortion is s = mu*x + nu*conj(x) with
    mu = (1 + (1+alpha) e^{j theta}) / 2 and nu = (1 - (1+alpha) e^{j theta}) / 2;
    the circulant channel applies by circular convolution with ``h``; the
    receiver mixes z = c1*(H s) + c2*conj(H s).  An ideal receiver is (1, 0).
    """
    x = np.asarray(x, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if x.ndim != 1 or h.ndim != 1:
        raise SignalError("x and h must be 1-D")
    n, ell = x.size, h.size
    if ell < 1:
        raise SignalError("impulse response must have at least one tap")
    if n < ell:
        raise SignalError(f"symbol vector length {n} shorter than channel {ell}")
    c1, c2 = complex(rx[0]), complex(rx[1])
    gain = (1.0 + profile.alpha) * np.exp(1j * profile.theta)
    mu = 0.5 * (1.0 + gain)
    nu = 0.5 * (1.0 - gain)
    s = mu * x + nu * np.conj(x)
    h_pad = np.zeros(n, dtype=complex)
    h_pad[:ell] = h
    hs = np.fft.ifft(np.fft.fft(h_pad) * np.fft.fft(s))
    z = c1 * hs + c2 * np.conj(hs)
    return ReceivedSignal(
        samples=z, impulse_response=h, tx_profile=profile, rx_constants=(c1, c2)
    )


def random_channel(length: int, rng: np.random.Generator, tap_var: float = 2.0) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian taps with given variance."""
    scale = math.sqrt(tap_var / 2.0)
    return scale * (rng.standard_normal(length) + 1j * rng.standard_normal(length))


def qpsk_symbols(n: int, rng: np.random.Generator) -> np.ndarray:
    bits = rng.integers(0, 2, size=(n, 2))
    return ((2 * bits[:, 0] - 1) + 1j * (2 * bits[:, 1] - 1)) / math.sqrt(2.0)
