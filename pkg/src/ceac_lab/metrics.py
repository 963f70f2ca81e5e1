"""Movement-quality metrics computed from trial logs.

Task-level: completion time, precision score (drawing), path-length
ratio (reaching), spectral arc length of the tangential speed profile.
Joint-level: range of motion, total movement, and the synergy joint
velocity index (co-activation fraction of shoulder and elbow during
transport phases).

All metrics are pure functions of their inputs; the report builder in
:mod:`ceac_lab.trial` feeds them 5 Hz zero-phase-filtered series at the
canonical 60 Hz log rate.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .signals import TimeSeries

__all__ = [
    "MetricReport",
    "precision_score",
    "path_length_ratio",
    "sparc",
    "range_of_motion",
    "total_movement",
    "sjvi",
    "completion_time",
    "METRIC_CSV_COLUMNS",
    "report_csv_row",
    "report_csv_header",
]

SPARC_BAND_START = 0.1  # rad/s, lower edge of the spectral band
SPARC_DB_CUTOFF = -40.0  # dB, adaptive upper band edge
SPARC_MAG_FLOOR = 1e-10  # floor before the log so notches stay finite
SJVI_ACTIVE_THRESHOLD = 1.0  # deg/s, |rate| at or above counts as active
SJVI_DWELL_EXCLUSION = 2.0  # s, tail of each phase excluded (target hold)


@dataclass(frozen=True)
class MetricReport:
    """All metrics for one trial; fields not applicable to the task kind are None."""

    task_kind: str
    completed: bool
    completion_time: float | None = None
    precision_mm: float | None = None
    plr: float | None = None
    sparc: float | None = None
    rom_trunk: float | None = None
    rom_shoulder: float | None = None
    rom_elbow: float | None = None
    total_trunk: float | None = None
    total_shoulder: float | None = None
    total_elbow: float | None = None
    sjvi: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


METRIC_CSV_COLUMNS = [
    "task_kind",
    "completed",
    "completion_time",
    "precision_mm",
    "plr",
    "sparc",
    "rom_trunk",
    "rom_shoulder",
    "rom_elbow",
    "total_trunk",
    "total_shoulder",
    "total_elbow",
    "sjvi",
]


def report_csv_header() -> str:
    return ",".join(METRIC_CSV_COLUMNS)


def report_csv_row(report: MetricReport) -> str:
    """One flat CSV row per trial; None renders as an empty cell."""
    d = asdict(report)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="")
    writer.writerow(
        ["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c]) for c in METRIC_CSV_COLUMNS]
    )
    return out.getvalue()


def _resample_by_arclength(points: np.ndarray, step: float) -> np.ndarray:
    """Resample a polyline at uniform arc-length spacing (linear interpolation)."""
    seg = np.diff(points, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    s = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = s[-1]
    if total <= 0.0:
        return points[:1]
    n = max(2, int(math.floor(total / step)) + 1)
    si = np.linspace(0.0, total, n)
    return np.column_stack([np.interp(si, s, points[:, 0]), np.interp(si, s, points[:, 1])])


def _point_to_polyline_distances(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Min distance from each point to a polyline, by exact segment projection."""
    a = polyline[:-1]
    d = polyline[1:] - a
    seg_len_sq = np.einsum("ij,ij->i", d, d)
    seg_len_sq = np.where(seg_len_sq == 0.0, 1.0, seg_len_sq)
    # t[i, j]: projection parameter of point i on segment j, clamped to [0, 1]
    diff = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pjk,jk->pj", diff, d) / seg_len_sq[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.linalg.norm(points[:, None, :] - proj, axis=2)
    return dist.min(axis=1)


def precision_score(drawn: np.ndarray, reference: np.ndarray, resample_mm: float = 0.5) -> float:
    """Mean distance (mm) from the drawn curve to the reference path.

    The drawn curve is resampled every ``resample_mm`` along its arc
    length; each sample contributes its minimum Euclidean distance to
    the reference polyline.

    Raises:
        ValueError: empty or zero-length drawn trace.
    """
    drawn = np.asarray(drawn, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if drawn.ndim != 2 or len(drawn) < 2:
        raise ValueError("drawn trace must contain at least two points")
    seg = np.diff(drawn, axis=0)
    if float(np.hypot(seg[:, 0], seg[:, 1]).sum()) <= 0.0:
        raise ValueError("drawn trace has zero length")
    samples = _resample_by_arclength(drawn, resample_mm * 1e-3)
    return float(np.mean(_point_to_polyline_distances(samples, reference))) * 1e3


def path_length_ratio(positions: np.ndarray) -> float:
    """Traveled path length over straight-line displacement (1 = ideal).

    Raises:
        ValueError: fewer than 2 points, or start equal to end (the
        straight-line displacement would be zero).
    """
    p = np.asarray(positions, dtype=float)
    if len(p) < 2:
        raise ValueError("need at least two positions")
    net = float(np.linalg.norm(p[-1] - p[0]))
    if net == 0.0:
        raise ValueError("start equals end: path-length ratio undefined")
    steps = np.linalg.norm(np.diff(p, axis=0), axis=1)
    return float(steps.sum()) / net


def _sparc_from_spectrum(omega: np.ndarray, mag: np.ndarray) -> float:
    """Arc length of the (band-normalized freq, dB magnitude) curve, negated."""
    k0_candidates = np.nonzero(omega >= SPARC_BAND_START)[0]
    if len(k0_candidates) == 0:
        raise ValueError("spectral band start above Nyquist")
    k0 = int(k0_candidates[0])
    ref = mag[k0]
    if ref <= 0.0:
        raise ValueError("zero magnitude at band start: normalization undefined")
    norm = np.maximum(mag / ref, SPARC_MAG_FLOOR)
    level = 20.0 * np.log10(norm)
    # adaptive upper edge: the band ends where the level first drops below
    # the cutoff (everything beyond is noise-floor ripple); never below the
    # band start itself
    below = np.nonzero(level[k0:] < SPARC_DB_CUTOFF)[0]
    k1 = k0 + int(below[0]) - 1 if len(below) else len(level) - 1
    k1 = max(k1, k0 + 1)
    if k1 >= len(level):
        k1 = len(level) - 1
    w = (omega[k0 : k1 + 1] - omega[k0]) / (omega[k1] - omega[k0])
    l = level[k0 : k1 + 1]
    return -float(np.sum(np.sqrt(np.diff(w) ** 2 + np.diff(l) ** 2)))


def sparc(speed: TimeSeries) -> float:
    """Spectral arc length of a tangential-speed profile (negative).

    Procedure: remove the mean and normalize to unit energy, zero-pad to
    the next power of two at least 4x the length, take the FFT magnitude
    normalized to its value at the 0.1 rad/s band start, end the band at
    the last point at or above -40 dB, and return the negated arc length
    of the log-magnitude curve over the band (frequency axis normalized
    to the band width).  Less negative means smoother.

    Raises:
        ValueError: fewer than 32 samples, or a constant/all-zero
        profile (normalization undefined).
    """
    v = np.asarray(speed.values, dtype=float)
    if len(v) < 32:
        raise ValueError("sparc needs at least 32 samples")
    w = v - v.mean()
    energy = math.sqrt(float(np.sum(w * w)))
    if energy == 0.0:
        raise ValueError("constant speed profile: normalization undefined")
    w = w / energy
    nfft = 1 << max(0, int(math.ceil(math.log2(4 * len(v)))))
    mag = np.abs(np.fft.rfft(w, nfft))
    omega = 2.0 * math.pi * np.arange(len(mag)) * speed.rate / nfft
    return _sparc_from_spectrum(omega, mag)


def range_of_motion(angles: TimeSeries) -> float:
    """Max minus min joint angle (deg) over the trial."""
    v = angles.values
    if len(v) == 0:
        raise ValueError("empty series")
    return float(v.max() - v.min())


def total_movement(angles: TimeSeries) -> float:
    """Cumulative absolute angular change (deg): sum |theta_{i+1} - theta_i|."""
    v = angles.values
    if len(v) == 0:
        raise ValueError("empty series")
    return float(np.abs(np.diff(v)).sum())


def completion_time(log) -> float | None:
    """Task completion time (s) from a trial log's progress markers.

    Drawing: first displacement beyond the start line to the return and
    immobility at it.  Reaching: first target cue to the entry of the
    final successful dwell.  Both timestamps are recorded by the task
    evaluator during the trial; incomplete trials return None.

    Raises:
        ValueError: the log carries no task progress markers at all.
    """
    summary = getattr(log, "summary", {}) or {}
    events = dict()
    for t, name in getattr(log, "events", []):
        events.setdefault(name, t)
    started = summary.get("started_at", events.get("task_started"))
    ended = summary.get("ended_at", events.get("task_ended"))
    if started is None and "task_started" not in events and "started_at" not in summary:
        raise ValueError("log has no task progress markers")
    if started is None or ended is None or not summary.get("completed", ended is not None):
        return None
    return float(ended) - float(started)


def sjvi(
    elbow_rate: TimeSeries,
    shoulder_rate: TimeSeries,
    phase_bounds: list[tuple[float, float]],
    dwell_exclusion: float = SJVI_DWELL_EXCLUSION,
) -> float:
    """Synergy joint velocity index: mean co-activation fraction per phase.

    For each (start, end) phase the final ``dwell_exclusion`` seconds
    are dropped (target hold); remaining samples count as co-active
    when both |rates| >= 1 deg/s.  Phases too short for the exclusion
    are skipped with a warning.  Result lies in [0, 1].

    Raises:
        ValueError: mismatched series or no phases.
    """
    if len(elbow_rate) != len(shoulder_rate):
        raise ValueError("elbow and shoulder series must have equal length")
    if len(phase_bounds) == 0:
        raise ValueError("need at least one phase")
    t = elbow_rate.t
    fractions = []
    for start, end in phase_bounds:
        cut = end - dwell_exclusion
        mask = (t >= start) & (t < cut)
        if cut <= start or not np.any(mask):
            warnings.warn(
                f"phase [{start:.3f}, {end:.3f}] shorter than the {dwell_exclusion} s "
                "dwell exclusion; skipped",
                stacklevel=2,
            )
            continue
        both = (np.abs(elbow_rate.values[mask]) >= SJVI_ACTIVE_THRESHOLD) & (
            np.abs(shoulder_rate.values[mask]) >= SJVI_ACTIVE_THRESHOLD
        )
        fractions.append(float(np.mean(both)))
    if not fractions:
        raise ValueError("no phase survived the dwell exclusion")
    return float(np.mean(fractions))
