"""Offline preprocessing of logged time series.

Analysis-side filtering and differentiation: zero-phase third-order
Butterworth low-pass (forward-backward application with odd-reflection
edge padding) and central-difference differentiation.  The simulator's
control loop runs on raw signals; filtering happens only here, before
metric computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

__all__ = ["TimeSeries", "butterworth_coeffs", "filtfilt", "differentiate"]


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar series."""

    t: np.ndarray
    values: np.ndarray
    rate: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be 1-D arrays of equal length")
        if len(t) >= 2:
            dt = np.diff(t)
            if np.max(np.abs(dt - 1.0 / self.rate)) > 1e-9:
                raise ValueError("time grid must be uniform at 1/rate within 1e-9 s")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")

    @classmethod
    def from_values(cls, values, rate: float, t0: float = 0.0) -> "TimeSeries":
        values = np.asarray(values, dtype=float)
        t = t0 + np.arange(len(values)) / rate
        return cls(t=t, values=values, rate=rate)

    def __len__(self) -> int:
        return len(self.values)


def butterworth_coeffs(order: int, cutoff: float, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Low-pass Butterworth (b, a) via the pre-warped bilinear transform.

    DC gain is exactly 1 (sum(b)/sum(a) = 1 up to float rounding).

    Raises:
        ValueError: cutoff outside (0, rate/2).
    """
    if not (0.0 < cutoff < rate / 2.0):
        raise ValueError(f"cutoff must satisfy 0 < cutoff < rate/2, got {cutoff} at {rate} Hz")
    b, a = scipy.signal.butter(order, cutoff, btype="low", fs=rate)
    return b, a


def filtfilt(series: TimeSeries, coeffs: tuple[np.ndarray, np.ndarray]) -> TimeSeries:
    """Zero-phase application: forward pass, reverse, second pass, reverse.

    Edges are odd-reflection padded with length 3 * (ntaps - 1); the
    effective magnitude response is the square of the single pass and
    the phase is identically zero.

    Raises:
        ValueError: series too short for the edge padding.
    """
    b, a = coeffs
    padlen = 3 * (max(len(b), len(a)) - 1)
    if len(series) <= padlen:
        raise ValueError(f"series length {len(series)} too short; needs > {padlen} samples")
    filtered = scipy.signal.filtfilt(b, a, series.values, padtype="odd", padlen=padlen)
    return TimeSeries(t=series.t, values=filtered, rate=series.rate)


def differentiate(series: TimeSeries) -> TimeSeries:
    """Numeric derivative: central differences inside, one-sided at edges.

    Raises:
        ValueError: fewer than 3 samples.
    """
    if len(series) < 3:
        raise ValueError("differentiate needs at least 3 samples")
    deriv = np.gradient(series.values, 1.0 / series.rate, edge_order=2)
    return TimeSeries(t=series.t, values=deriv, rate=series.rate)
