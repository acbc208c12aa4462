"""Optimal integer split of packet-signing work between an end device and an
edge device.

The edge device is available for a fraction phi of the deadline T; the end
device has the whole window.  Per-packet signing cost is either modeled as
B_s * C_b / f from the device clock or measured once on the build host and
frequency-scaled to each device profile.  The optimizer balances the two
completion times, rounds the edge share upward, clamps to the availability
cap, and re-checks feasibility, which reproduces the exhaustive integer
minimum (the makespan is convex in the split).
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, asdict
from functools import lru_cache
from math import ceil, floor

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import padding, rsa


class OffloadError(ValueError):
    pass


class InfeasibleError(OffloadError):
    """No integer split satisfies both time constraints."""


@dataclass(frozen=True)
class DeviceProfile:
    """Signing-capable device; a measured per-packet time overrides the clock model."""

    name: str
    freq_hz: float
    cycles_per_bit: float | None = None
    calibrated_xi: float | None = None

    def __post_init__(self):
        if self.freq_hz <= 0:
            raise OffloadError("freq_hz must be positive")

    def seconds_per_packet(self, b_s: float | None = None, c_b: float | None = None) -> float:
        if self.calibrated_xi is not None:
            return self.calibrated_xi
        bits = b_s
        cycles = c_b if c_b is not None else self.cycles_per_bit
        if bits is None or cycles is None:
            raise OffloadError(
                f"{self.name}: need B_s and C_b (or a calibrated per-packet time)"
            )
        return bits * cycles / self.freq_hz


# Device classes used throughout the experiments: a constrained sensor node,
# a single-board edge computer, and a laptop-class edge computer.
CC2430 = DeviceProfile("cc2430", 32e6)
RASPBERRY_PI3 = DeviceProfile("pi3", 1.2e9)
LAPTOP = DeviceProfile("laptop", 2.4e9)


@dataclass(frozen=True)
class OffloadPlan:
    n_p1: int  # packets signed at the edge
    n_p2: int  # packets signed on the end device
    t1: float
    t2: float
    makespan: float

    def to_json_dict(self) -> dict:
        return asdict(self)


def time_saving(n_p: int, b_s: float, c_b: float, f_ed: float, f_mec: float) -> float:
    """Completion-time difference of signing everything locally vs at the edge."""
    if min(n_p, b_s, c_b, f_ed, f_mec) <= 0:
        raise OffloadError("all inputs must be positive")
    return n_p * b_s * c_b * (1.0 / f_ed - 1.0 / f_mec)


def _plan(n_p1: int, n_p: int, xi_mec: float, xi_ed: float) -> OffloadPlan:
    n_p2 = n_p - n_p1
    t1 = n_p1 * xi_mec
    t2 = n_p2 * xi_ed
    return OffloadPlan(n_p1, n_p2, t1, t2, max(t1, t2))


def optimize(
    n_p: int,
    b_s: float | None,
    c_b: float | None,
    ed: DeviceProfile,
    mec: DeviceProfile,
    phi: float,
    t_deadline: float,
) -> OffloadPlan:
    """Feasible integer split minimizing the parallel completion time.

    Constraints: the edge share must fit in phi * T, the end-device share in
    T, and the shares must sum to n_p.  The continuous balance point puts
    n_p * f_mec / (f_mec + f_ed) packets at the edge; the integer optimum is
    that point rounded (edge-favored on ties) and clamped into the feasible
    range.  phi = 1 is accepted for a fully dedicated edge device.
    """
    if n_p < 0:
        raise OffloadError("n_p must be non-negative")
    if not 0 <= phi <= 1:
        raise OffloadError(f"phi {phi} outside [0, 1]")
    if t_deadline <= 0:
        raise OffloadError("deadline must be positive")
    if n_p == 0:
        return OffloadPlan(0, 0, 0.0, 0.0, 0.0)
    xi_ed = ed.seconds_per_packet(b_s, c_b)
    xi_mec = mec.seconds_per_packet(b_s, c_b)
    cap = min(n_p, floor(phi * t_deadline / xi_mec + 1e-12))
    n1_min = max(0, n_p - floor(t_deadline / xi_ed + 1e-12))
    if n1_min > cap:
        raise InfeasibleError(
            f"even {cap} packets at the edge leaves {n_p - cap} locally, "
            f"which misses the deadline {t_deadline}"
        )
    balance = n_p * xi_ed / (xi_ed + xi_mec)
    candidates = {
        min(max(int(floor(balance)), n1_min), cap),
        min(max(int(ceil(balance)), n1_min), cap),
    }
    plans = [_plan(n1, n_p, xi_mec, xi_ed) for n1 in sorted(candidates)]
    # prefer the larger edge share on ties (edge signs the marginal packet)
    return min(plans, key=lambda p: (p.makespan, -p.n_p1))


def calibrate_xi(
    key_bits: int,
    device: DeviceProfile,
    host_measurement: float,
    host_freq_hz: float,
) -> DeviceProfile:
    """Frequency-scaled per-packet signing time for a device profile.

    The host measurement (seconds per signature at ``key_bits``) scales by
    host_freq / device_freq, emulating the slower or faster clock.
    """
    if host_measurement <= 0 or host_freq_hz <= 0:
        raise OffloadError("measurement and host frequency must be positive")
    xi = host_measurement * host_freq_hz / device.freq_hz
    return DeviceProfile(
        name=device.name,
        freq_hz=device.freq_hz,
        cycles_per_bit=device.cycles_per_bit,
        calibrated_xi=xi,
    )


@lru_cache(maxsize=8)
def _timing_key(bits: int) -> rsa.RSAPrivateKey:
    return rsa.generate_private_key(public_exponent=65537, key_size=bits)


def measure_host_signing(key_bits: int, reps: int = 9) -> float:
    """Median seconds per RSA PKCS#1 v1.5 signature of a fixed digest-sized message."""
    key = _timing_key(key_bits)
    message = b"\x5a" * 32
    key.sign(message, padding.PKCS1v15(), hashes.SHA256())  # warm up
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        key.sign(message, padding.PKCS1v15(), hashes.SHA256())
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)
