"""Analytic electret-microphone transfer function.

An electret microphone used as a photoacoustic detector distorts the acoustic
signal like a cascade of linear filters: below ~1 kHz its RC electronics act
as a first-order high-pass stage, above ~1 kHz its acoustics act as two
second-order low-pass resonators. The full response is the product

    H(f) = HP(f; f2) * LP2(f; f3, xi3) * LP2(f; f4, xi4)

with HP(f; fc) = j(f/fc) / (1 + j(f/fc)) and
LP2(f; f0, xi) = 1 / (1 - (f/f0)^2 + 2j*xi*(f/f0)).

A microphone type is characterised by the corner frequency f2, the two
resonance frequencies f3 and f4, and the damping factors xi3 and xi4
(resonance peak magnitude is 1/(2*xi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

HALF_PI = 0.5 * math.pi


class MicClass(IntEnum):
    """The three supported microphone types, encoded as class labels 0/1/2."""

    ECM30B = 0
    ECM60 = 1
    WM66 = 2


@dataclass(frozen=True)
class MicParams:
    """One microphone parameterization.

    Attributes:
        f2: corner frequency of the electronic high-pass stage (Hz)
        f3: first acoustic resonance frequency (Hz)
        f4: second acoustic resonance frequency (Hz)
        xi3: damping factor of the first resonator, in (0, 1]
        xi4: damping factor of the second resonator, in (0, 1]
    """

    f2: float
    f3: float
    f4: float
    xi3: float
    xi4: float

    def __post_init__(self):
        for name in ("f2", "f3", "f4", "xi3", "xi4"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        for name in ("xi3", "xi4"):
            if getattr(self, name) > 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {getattr(self, name)!r}")


@dataclass(eq=False)
class FrequencyGrid:
    """Ordered, equally spaced sample frequencies (Hz), endpoints included.

    Spacing must be uniform to within 1e-9 relative; points strictly increasing.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two 1-D points")
        if not np.all(np.isfinite(pts)) or pts[0] <= 0.0:
            raise ValueError("grid points must be finite and positive")
        steps = np.diff(pts)
        if np.any(steps <= 0.0):
            raise ValueError("grid points must be strictly increasing")
        mean_step = (pts[-1] - pts[0]) / (pts.size - 1)
        if np.max(np.abs(steps - mean_step)) > 1e-9 * mean_step:
            raise ValueError("grid points must be equally spaced (1e-9 relative)")
        self.points = pts

    @classmethod
    def linear(cls, f_min: float, f_max: float, count: int) -> "FrequencyGrid":
        return cls(np.linspace(f_min, f_max, count))

    @property
    def f_min(self) -> float:
        return float(self.points[0])

    @property
    def f_max(self) -> float:
        return float(self.points[-1])

    @property
    def count(self) -> int:
        return int(self.points.size)

    def to_dict(self) -> dict:
        return {
            "f_min": self.f_min,
            "f_max": self.f_max,
            "count": self.count,
            "points": self.points.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrequencyGrid":
        grid = cls(np.asarray(d["points"], dtype=np.float64))
        if grid.count != int(d["count"]):
            raise ValueError("grid point list does not match declared count")
        return grid

    def __eq__(self, other):
        return isinstance(other, FrequencyGrid) and np.array_equal(self.points, other.points)


def full_range_grid() -> FrequencyGrid:
    """150 equally spaced frequencies on [20, 20000] Hz."""
    return FrequencyGrid.linear(20.0, 20000.0, 150)


def restricted_range_grid() -> FrequencyGrid:
    """70 equally spaced frequencies on [800, 20000] Hz (the overlap band)."""
    return FrequencyGrid.linear(800.0, 20000.0, 70)


def _check_freq(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if not np.all(np.isfinite(f)) or np.any(f < 0.0):
        raise ValueError("frequency must be finite and >= 0")
    return f


def hp_response(f, f2: float):
    """First-order high-pass response j*u / (1 + j*u) with u = f/f2.

    Accepts a scalar or array frequency; returns complex of the same shape.
    """
    if not math.isfinite(f2) or f2 <= 0.0:
        raise ValueError(f"f2 must be finite and > 0, got {f2!r}")
    u = _check_freq(f) / f2
    out = (1j * u) / (1.0 + 1j * u)
    return complex(out) if np.ndim(out) == 0 else out


def lp2_response(f, f0: float, xi: float):
    """Second-order low-pass response 1 / (1 - u^2 + 2j*xi*u) with u = f/f0.

    Unity gain at DC; magnitude 1/(2*xi) at u = 1 (the resonance peak).
    """
    if not math.isfinite(f0) or f0 <= 0.0:
        raise ValueError(f"f0 must be finite and > 0, got {f0!r}")
    if not math.isfinite(xi) or xi <= 0.0 or xi > 1.0:
        raise ValueError(f"xi must lie in (0, 1], got {xi!r}")
    u = _check_freq(f) / f0
    out = 1.0 / (1.0 - u * u + 2j * xi * u)
    return complex(out) if np.ndim(out) == 0 else out


def mic_response(p: MicParams, f):
    """Full complex microphone response: high-pass times both low-pass stages."""
    return (
        hp_response(f, p.f2)
        * lp2_response(f, p.f3, p.xi3)
        * lp2_response(f, p.f4, p.xi4)
    )


def sweep_batch(f2, f3, f4, xi3, xi4, freqs):
    """Amplitude/phase curves for many parameter tuples at once.

    Args:
        f2, f3, f4, xi3, xi4: 1-D arrays of length n (one microphone per row)
        freqs: 1-D array of m sample frequencies (Hz)

    Returns:
        (amplitudes, phases): two (n, m) float64 arrays. Amplitude is the
        product of the per-stage magnitudes; phase is the sum of the per-stage
        analytic phases (high-pass in [0, pi/2], each low-pass in (-pi, 0]),
        so the curve is continuous without a wrapping pass.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    u = freqs / np.asarray(f2, dtype=np.float64)[:, None]
    amp = u / np.hypot(1.0, u)
    phase = HALF_PI - np.arctan(u)
    for fr, xi in ((f3, xi3), (f4, xi4)):
        u = freqs / np.asarray(fr, dtype=np.float64)[:, None]
        im = 2.0 * np.asarray(xi, dtype=np.float64)[:, None] * u
        re = 1.0 - u * u
        amp = amp / np.hypot(re, im)
        phase = phase - np.arctan2(im, re)
    return amp, phase


def amplitude_phase_sweep(p: MicParams, grid: FrequencyGrid):
    """Amplitude and phase (radians) of one microphone over a frequency grid.

    Returns two arrays of length grid.count. Phase is the naturally unwrapped
    per-stage sum, matching arg(mic_response) modulo 2*pi.
    """
    one = np.asarray
    amp, phase = sweep_batch(
        one([p.f2]), one([p.f3]), one([p.f4]), one([p.xi3]), one([p.xi4]), grid.points
    )
    return amp[0], phase[0]
