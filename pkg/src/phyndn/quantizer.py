"""Equal-probability-mass quantizers over composite-parameter densities.

The offline phase turns the population density of the composite IQI parameter
into interval boundaries carrying probability mass 1/M each (the entropy-
maximizing choice).  Online values map to an interval index and a level (the
interval midpoint); device identifiers are hashes of the level, so identities
are recomputable from the quantizer alone.  Specs are immutable; inserting a
sub-boundary to separate two near-colliding devices returns a new version.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .pdfs import PiecewisePdf


class QuantizerError(ValueError):
    pass


@dataclass(frozen=True)
class PhyId:
    """32-byte identity digest of a quantization level."""

    digest: bytes

    def __post_init__(self):
        if len(self.digest) != 32:
            raise QuantizerError("digest must be 32 bytes")

    @property
    def display(self) -> str:
        return self.digest.hex()

    @classmethod
    def from_hex(cls, text: str) -> "PhyId":
        return cls(bytes.fromhex(text))


def phy_id(level: float, spec_version: int, epsilon: float = 0.0) -> PhyId:
    """SHA-256 over the level (+ optional offset) and the quantizer version.

    Encoded as big-endian IEEE-754 float64 bits of (level + epsilon) followed
    by the big-endian uint32 version, so the identity is a pure function of
    its inputs and distinct levels give distinct digests.
    """
    payload = struct.pack(">d", float(level) + float(epsilon))
    payload += struct.pack(">I", int(spec_version))
    return PhyId(hashlib.sha256(payload).digest())


@dataclass(frozen=True)
class QuantizerSpec:
    """Sorted boundary vector plus any inserted sub-boundaries.

    ``base_boundaries`` is the constructed b_0..b_M vector; ``inserted`` holds
    later sub-boundaries separately so provenance survives serialization.
    Values quantize into half-open intervals [b_m, b_{m+1}) with the last
    interval closed; a value exactly on an interior boundary goes right.
    """

    base_boundaries: np.ndarray
    inserted: tuple[float, ...] = ()
    pdf_ref: str = ""
    version: int = 0
    _merged: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = np.asarray(self.base_boundaries, dtype=float)
        if base.ndim != 1 or base.size < 3:
            raise QuantizerError("need at least b_0, b_1, b_2")
        if not np.all(np.diff(base) > 0):
            raise QuantizerError("boundaries must be strictly increasing")
        object.__setattr__(self, "base_boundaries", base)
        object.__setattr__(self, "inserted", tuple(sorted(self.inserted)))
        merged = np.sort(np.concatenate([base, np.asarray(self.inserted, float)]))
        if not np.all(np.diff(merged) > 0):
            raise QuantizerError("inserted sub-boundary duplicates a boundary")
        lo, hi = base[0], base[-1]
        if self.inserted and (min(self.inserted) <= lo or max(self.inserted) >= hi):
            raise QuantizerError("inserted sub-boundary outside the support")
        object.__setattr__(self, "_merged", merged)

    @property
    def boundaries(self) -> np.ndarray:
        """All boundaries (base plus inserted), sorted."""
        return self._merged

    @property
    def n_intervals(self) -> int:
        return self._merged.size - 1

    @property
    def levels(self) -> np.ndarray:
        return 0.5 * (self._merged[:-1] + self._merged[1:])

    @property
    def support(self) -> tuple[float, float]:
        return float(self._merged[0]), float(self._merged[-1])

    def quantize(self, a_hat: float) -> tuple[int, float]:
        """Interval index and level for ``a_hat`` (edge intervals clamp)."""
        idx = int(np.searchsorted(self._merged, a_hat, side="right")) - 1
        idx = min(max(idx, 0), self.n_intervals - 1)
        return idx, float(self.levels[idx])

    def quantize_many(self, a_hat: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._merged, np.asarray(a_hat, float), side="right") - 1
        return np.clip(idx, 0, self.n_intervals - 1)

    def interval(self, idx: int) -> tuple[float, float]:
        return float(self._merged[idx]), float(self._merged[idx + 1])

    def entropy(self, pdf: PiecewisePdf) -> float:
        """Shannon entropy (bits) of the interval occupancy under ``pdf``."""
        lo, hi = pdf.support
        if abs(lo - self._merged[0]) > 1e-9 or abs(hi - self._merged[-1]) > 1e-9:
            raise QuantizerError(
                f"quantizer support {self.support} does not match pdf support {(lo, hi)}"
            )
        cdf_vals = np.array([pdf.cdf(b) for b in self._merged])
        p = np.diff(cdf_vals)
        p = p[p > 0]
        return float(-np.sum(p * np.log2(p)))

    def insert_sub_boundary(self, a_a: float, a_b: float) -> "QuantizerSpec":
        """New spec (version + 1) splitting the interval shared by two values."""
        if a_a == a_b:
            raise QuantizerError("cannot separate equal values")
        idx_a, _ = self.quantize(a_a)
        idx_b, _ = self.quantize(a_b)
        if idx_a != idx_b:
            raise QuantizerError(
                f"values already quantize to different intervals ({idx_a} vs {idx_b})"
            )
        mid = 0.5 * (a_a + a_b)
        return QuantizerSpec(
            base_boundaries=self.base_boundaries,
            inserted=self.inserted + (float(mid),),
            pdf_ref=self.pdf_ref,
            version=self.version + 1,
        )

    def to_json_dict(self) -> dict:
        return {
            "pdf_ref": self.pdf_ref,
            "version": self.version,
            "base_boundaries": self.base_boundaries.tolist(),
            "inserted": list(self.inserted),
            "levels": self.levels.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "QuantizerSpec":
        return cls(
            base_boundaries=np.asarray(d["base_boundaries"], float),
            inserted=tuple(d["inserted"]),
            pdf_ref=d["pdf_ref"],
            version=int(d["version"]),
        )


def build_uniform(a_max: float, m: int) -> QuantizerSpec:
    """Equal-mass quantizer for a symmetric uniform input U(-a_max, a_max).

    Equal probability mass under a uniform law means equally spaced
    boundaries: b_k = (2k/M - 1) * a_max for k = 0..M.
    """
    if a_max <= 0:
        raise QuantizerError("a_max must be positive")
    if m < 2:
        raise QuantizerError("need at least 2 intervals")
    k = np.arange(m + 1)
    bounds = (2.0 * k / m - 1.0) * a_max
    return QuantizerSpec(bounds, pdf_ref=f"uniform[{-a_max:.6g},{a_max:.6g}]")


def build_from_pdf(pdf: PiecewisePdf, m: int) -> QuantizerSpec:
    """Equal-mass quantizer for an arbitrary bounded density.

    Runs the boundary recursion b_{k+1} = F^{-1}(1/M + F(b_k)) segment by
    segment through the density's cached cumulative masses; the final
    boundary is pinned to the support's upper edge analytically.
    """
    if m < 2:
        raise QuantizerError("need at least 2 intervals")
    lo, hi = pdf.support
    bounds = np.empty(m + 1)
    bounds[0] = lo
    b = lo
    for k in range(m - 1):
        b = pdf.inverse_cdf(min(1.0 / m + pdf.cdf(b), 1.0))
        bounds[k + 1] = b
    bounds[m] = hi
    return QuantizerSpec(bounds, pdf_ref=pdf.ref)
