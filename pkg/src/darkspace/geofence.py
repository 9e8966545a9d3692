"""Dark-space scheduling: when must a transmitter pause for a radiometer.

The engine finds, for one ground transmitter against a constellation of
(TLE, radiometer) pairs, every interval during which a (buffered) pixel
footprint or scan-line strip subtends the transmitter.  It runs a coarse
horizon-visibility prefilter (a satellite below the horizon cannot subtend
anything), evaluates the subtension margin on the scanner's own sample
grid, and refines interval boundaries by bisection to well under 10 ms.

brute_force_oracle implements the same subtension predicate by dense time
sampling; it is the reference semantics the engine is tested against.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from typing import Sequence

import numpy as np

from .errors import EmptyConstellation, NotPhaseLocked, WindowTooLarge
from .orbit import GroundPoint, OrbitalElements, propagate_many, frames
from .radiometer import (BufferPolicy, PolicyKind, RadiometerSpec,
                         _ellipse_margins, _footprint_arrays)
from .timeutil import add_seconds, ensure_utc

#: Coarse prefilter: step (s) and below-horizon guard (deg).
COARSE_STEP_S = 30.0
HORIZON_GUARD_DEG = -2.0

#: Boundary bisection stops when the bracket is this small (s).
BISECT_TOL_S = 0.002

MAX_WINDOW_DAYS = 30.0


@dataclass(frozen=True)
class DarkInterval:
    """One dark-space interval, attributed to the satellite and scan line
    that opened it."""
    start: datetime
    end: datetime
    satellite_id: str
    scan_line_index: int

    @property
    def duration(self) -> float:
        return (self.end - self.start).total_seconds()


@dataclass(frozen=True)
class DarkSchedule:
    """Merged, ordered dark intervals for one transmitter over a window."""
    tx_id: str
    intervals: tuple
    window: tuple[datetime, datetime]
    policy: BufferPolicy

    def total_dark_seconds(self) -> float:
        return sum(iv.duration for iv in self.intervals)

    def window_seconds(self) -> float:
        return (self.window[1] - self.window[0]).total_seconds()


@dataclass(frozen=True)
class AvailabilityReport:
    """White/dark accounting for a schedule.

    dark_mode records whether dark time is spent paused or migrated to
    another band (the traffic-migration hook); effective_availability is the
    service availability under that handling.
    """
    white_fraction: float
    dark_fraction: float
    white_to_dark_ratio: float
    per_satellite_breakdown: dict
    dark_mode: str = "paused"
    effective_availability: float = None

    def __post_init__(self):
        if self.effective_availability is None:
            eff = (1.0 if self.dark_mode == "migrated"
                   else self.white_fraction)
            object.__setattr__(self, "effective_availability", eff)


# --- internal machinery ------------------------------------------------------


def _sample_indices(spec: RadiometerSpec, tau):
    """Scan line and sample index for offsets tau (s) from the phase origin.

    Identical arithmetic to radiometer.scan_phase, vectorized, including
    the half-microsecond boundary snap.
    """
    tau = np.asarray(tau, dtype=float) + 5.0e-7
    line = np.floor(tau / spec.scan_period)
    frac = tau - line * spec.scan_period
    idx = np.floor(frac / spec.sample_dwell).astype(np.int64)
    idx = np.clip(idx, 0, spec.samples_per_scan - 1)
    return line.astype(np.int64), idx


class _SatGeometry:
    """Vectorized margin evaluation for one satellite/radiometer pair.

    Offsets are seconds from the window start; the scan phase origin is the
    element set epoch.
    """

    def __init__(self, elements: OrbitalElements, spec: RadiometerSpec,
                 window_start: datetime, tx: GroundPoint,
                 policy: BufferPolicy, ground_altitude: float):
        self.elements = elements
        self.spec = spec
        self.window_start = window_start
        self.tx = tx
        self.tx_ecef = tx.ecef()
        self.policy = policy
        self.ground_altitude = ground_altitude
        self.base = (ensure_utc(window_start)
                     - ensure_utc(elements.epoch)).total_seconds()

    def tau(self, offsets):
        """Window offsets (s) -> scan-phase offsets from the epoch."""
        return self.base + np.asarray(offsets, dtype=float)

    def states(self, offsets):
        r, v = propagate_many(self.elements, self.window_start,
                              np.asarray(offsets, dtype=float))
        omega = np.array([0.0, 0.0, frames.OMEGA_EARTH]).reshape(3, 1)
        v_inertial = v + np.cross(omega, r, axis=0)
        return r, v_inertial

    def margins(self, offsets, boresight_deg):
        """Inflated-ellipse margin of the transmitter for given samples."""
        offsets = np.asarray(offsets, dtype=float)
        if offsets.size == 0:
            return np.empty(0)
        r, v = self.states(offsets)
        arrays = _footprint_arrays(r, v, boresight_deg, self.spec,
                                   self.ground_altitude)
        return _ellipse_margins(arrays, self.tx_ecef,
                                self.policy.buffer_multiplier)

    def margins_at(self, offsets):
        """Margin of the sample active at each offset (its own pixel)."""
        offsets = np.asarray(offsets, dtype=float)
        _, idx = _sample_indices(self.spec, self.tau(offsets))
        return self.margins(offsets, self.spec.boresight_of(idx))

    def visibility_windows(self, duration_s: float):
        """Coarse intervals (s offsets) when the satellite may be in view."""
        n = int(np.ceil(duration_s / COARSE_STEP_S)) + 1
        offsets = np.minimum(np.arange(n + 1) * COARSE_STEP_S, duration_s)
        r, _ = self.states(offsets)
        el, _, _ = frames.look_angles_from_ecef(
            r, self.tx_ecef.reshape(3, 1), self.tx.latitude,
            self.tx.longitude)
        mask = np.atleast_1d(el) > HORIZON_GUARD_DEG
        windows = []
        i = 0
        while i < len(mask):
            if mask[i]:
                j = i
                while j + 1 < len(mask) and mask[j + 1]:
                    j += 1
                lo = max(0.0, offsets[i] - COARSE_STEP_S)
                hi = min(duration_s, offsets[j] + COARSE_STEP_S)
                if windows and lo <= windows[-1][1]:
                    windows[-1] = (windows[-1][0], hi)
                else:
                    windows.append((lo, hi))
                i = j + 1
            else:
                i += 1
        return windows


def _merge_spans(spans, gap: float = 0.0):
    """Merge overlapping/adjacent (start, end, *payload) spans, sorted."""
    if not spans:
        return []
    spans = sorted(spans, key=lambda s: (s[0], s[1]))
    merged = [spans[0]]
    for span in spans[1:]:
        last = merged[-1]
        if span[0] <= last[1] + gap:
            if span[1] > last[1]:
                merged[-1] = (last[0], span[1], *last[2:])
        else:
            merged.append(span)
    return merged


def _bisect_boundary(geom: _SatGeometry, boresight: np.ndarray,
                     lo: np.ndarray, hi: np.ndarray,
                     dark_at_lo: np.ndarray) -> np.ndarray:
    """Locate the margin zero crossing inside (lo, hi) per element.

    dark_at_lo says which end of the bracket is inside the subtension
    region; the returned offsets are accurate to BISECT_TOL_S.
    """
    lo = lo.copy()
    hi = hi.copy()
    while np.any(hi - lo > BISECT_TOL_S):
        mid = 0.5 * (lo + hi)
        dark_mid = geom.margins(mid, boresight) <= 0.0
        # When lo is dark the boundary sits where dark ends.
        go_right = dark_mid == dark_at_lo
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _pixel_level_spans(geom: _SatGeometry, duration_s: float):
    """Dark (start, end, line) spans in window offsets, pixel granularity."""
    spec = geom.spec
    dwell = spec.sample_dwell
    spans = []
    for w0, w1 in geom.visibility_windows(duration_s):
        tau0 = geom.tau(w0)
        line_lo = int(np.floor(tau0 / spec.scan_period))
        n_samples = int(np.ceil((w1 - w0) / dwell)) + spec.samples_per_scan
        lines = line_lo + (np.arange(n_samples) // spec.samples_per_scan)
        idx = np.arange(n_samples) % spec.samples_per_scan
        tau_start = lines * spec.scan_period + idx * dwell
        starts = tau_start - geom.base
        keep = (starts + dwell > w0) & (starts < w1)
        lines, idx, starts = lines[keep], idx[keep], starts[keep]
        if starts.size == 0:
            continue
        ends = starts + dwell
        boresight = spec.boresight_of(idx)

        m_start = geom.margins(starts, boresight)
        m_end = geom.margins(ends, boresight)
        in_start = m_start <= 0.0
        in_end = m_end <= 0.0

        full = in_start & in_end
        for s, e, ln in zip(starts[full], ends[full], lines[full]):
            spans.append((float(s), float(e), int(ln)))

        enters = ~in_start & in_end
        if np.any(enters):
            cross = _bisect_boundary(geom, boresight[enters],
                                     starts[enters], ends[enters],
                                     dark_at_lo=np.zeros(np.sum(enters),
                                                         dtype=bool))
            for s, e, ln in zip(cross, ends[enters], lines[enters]):
                spans.append((float(s), float(e), int(ln)))

        leaves = in_start & ~in_end
        if np.any(leaves):
            cross = _bisect_boundary(geom, boresight[leaves],
                                     starts[leaves], ends[leaves],
                                     dark_at_lo=np.ones(np.sum(leaves),
                                                        dtype=bool))
            for s, e, ln in zip(starts[leaves], cross, lines[leaves]):
                spans.append((float(s), float(e), int(ln)))
    return spans


def _line_dark_flags(geom: _SatGeometry, lines: np.ndarray):
    """Which whole scan lines subtend the transmitter (strip test).

    A line is dark when any of its samples' inflated pixels contains the
    transmitter at either end of the sample's dwell, which makes scan-line
    schedules an exact superset of pixel-level ones.
    """
    spec = geom.spec
    n = spec.samples_per_scan
    lines = np.asarray(lines, dtype=np.int64)
    if lines.size == 0:
        return np.zeros(0, dtype=bool)
    idx = np.tile(np.arange(n), lines.size)
    line_rep = np.repeat(lines, n)
    tau_start = line_rep * spec.scan_period + idx * spec.sample_dwell
    offsets = tau_start - geom.base
    boresight = spec.boresight_of(idx)
    m_start = geom.margins(offsets, boresight)
    m_end = geom.margins(offsets + spec.sample_dwell, boresight)
    dark = (m_start <= 0.0) | (m_end <= 0.0)
    return dark.reshape(lines.size, n).any(axis=1)


def _scan_line_spans(geom: _SatGeometry, duration_s: float):
    """Dark (start, end, line) spans at scan-line granularity."""
    spec = geom.spec
    spans = []
    for w0, w1 in geom.visibility_windows(duration_s):
        line_lo = int(np.floor(geom.tau(w0) / spec.scan_period))
        line_hi = int(np.floor(geom.tau(w1) / spec.scan_period))
        lines = np.arange(line_lo, line_hi + 1)
        dark = _line_dark_flags(geom, lines)
        for ln in lines[dark]:
            s = ln * spec.scan_period - geom.base
            spans.append((float(s), float(s + spec.scan_period), int(ln)))
    return spans


#: Treat spans separated by less than this as touching (float slack, s).
_MERGE_EPS = 1.0e-9


def _finalize_schedule(per_sat_spans, tx_id, window, policy):
    """Pad, clip, merge and convert spans to a DarkSchedule."""
    start, end = window
    duration = (end - start).total_seconds()
    padded = []
    for sat_id, spans in per_sat_spans:
        spans = _merge_spans([(s, e, ln) for s, e, ln in spans],
                             gap=_MERGE_EPS)
        for s, e, ln in spans:
            s2 = max(0.0, s - policy.temporal_pad)
            e2 = min(duration, e + policy.temporal_pad)
            if e2 > s2:
                padded.append((s2, e2, (sat_id, ln)))
    merged = _merge_spans(padded, gap=_MERGE_EPS)
    intervals = tuple(
        DarkInterval(start=add_seconds(start, s), end=add_seconds(start, e),
                     satellite_id=payload[0], scan_line_index=payload[1])
        for s, e, payload in merged)
    return DarkSchedule(tx_id=tx_id, intervals=intervals, window=window,
                        policy=policy)


def _validate_inputs(sats, window, policy):
    if not sats:
        raise EmptyConstellation("at least one satellite is required")
    start, end = ensure_utc(window[0]), ensure_utc(window[1])
    if end <= start:
        raise WindowTooLarge("window end must be after start")
    if (end - start).total_seconds() > MAX_WINDOW_DAYS * 86400.0:
        raise WindowTooLarge(
            f"window exceeds {MAX_WINDOW_DAYS:.0f} days")
    if policy.kind is PolicyKind.PIXEL_LEVEL:
        for _, spec in sats:
            if not spec.phase_locked:
                raise NotPhaseLocked(
                    f"radiometer {spec.name} is not phase locked; "
                    "pixel-level geofencing is not available")
    return start, end


# --- public API --------------------------------------------------------------


def dark_intervals(tx: GroundPoint,
                   sats: Sequence[tuple[OrbitalElements, RadiometerSpec]],
                   window: tuple[datetime, datetime],
                   policy: BufferPolicy,
                   tx_id: str = "tx",
                   ground_altitude: float = 0.0) -> DarkSchedule:
    """Compute the dark-space schedule for one transmitter.

    The scan phase origin of each satellite is its element set epoch.
    Intervals are merged per satellite, padded by the policy's temporal pad,
    merged across satellites (attribution goes to the earliest contributor)
    and clipped to the window.
    """
    start, end = _validate_inputs(sats, window, policy)
    duration = (end - start).total_seconds()
    per_sat = []
    for elements, spec in sats:
        geom = _SatGeometry(elements, spec, start, tx, policy,
                            ground_altitude)
        if policy.kind is PolicyKind.PIXEL_LEVEL:
            spans = _pixel_level_spans(geom, duration)
        else:
            spans = _scan_line_spans(geom, duration)
        per_sat.append((elements.satellite_id, spans))
    return _finalize_schedule(per_sat, tx_id, (start, end), policy)


def brute_force_oracle(tx: GroundPoint,
                       sats: Sequence[tuple[OrbitalElements,
                                            RadiometerSpec]],
                       window: tuple[datetime, datetime],
                       policy: BufferPolicy,
                       dt: float,
                       tx_id: str = "tx",
                       ground_altitude: float = 0.0,
                       chunk: int = 200_000) -> DarkSchedule:
    """Reference schedule by dense time sampling every dt seconds.

    Evaluates the subtension predicate exactly at each sample and assembles
    maximal runs of subtended samples into intervals.  Samples where the
    satellite is provably below the horizon are skipped (they cannot
    subtend), which leaves the result identical to exhaustive sampling.
    Cost is O(window / dt); intervals shorter than dt can be missed, so
    tests must choose dt well below the expected interval durations.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    start, end = _validate_inputs(sats, window, policy)
    duration = (end - start).total_seconds()
    per_sat = []
    for elements, spec in sats:
        geom = _SatGeometry(elements, spec, start, tx, policy,
                            ground_altitude)
        spans = []
        for w0, w1 in geom.visibility_windows(duration):
            i0 = int(np.ceil(w0 / dt))
            i1 = int(np.floor(w1 / dt))
            if i1 < i0:
                continue
            sub = None

            def _emit(run):
                # A run of dark samples stands for an interval reaching up
                # to half a step beyond its first and last sample; this
                # keeps single-sample runs non-degenerate and the boundary
                # estimate midpoint-unbiased.
                spans.append((run[0] - dt / 2.0, run[1] + dt / 2.0, run[2]))

            for c0 in range(i0, i1 + 1, chunk):
                c1 = min(c0 + chunk - 1, i1)
                offsets = np.arange(c0, c1 + 1) * dt
                if policy.kind is PolicyKind.PIXEL_LEVEL:
                    dark = geom.margins_at(offsets) <= 0.0
                else:
                    lines, _ = _sample_indices(spec, geom.tau(offsets))
                    uniq, inverse = np.unique(lines, return_inverse=True)
                    dark = _line_dark_flags(geom, uniq)[inverse]
                # Assemble runs of consecutive dark samples.
                padded_mask = np.concatenate(([False], dark, [False]))
                edges = np.flatnonzero(np.diff(padded_mask.astype(np.int8)))
                for a, b in zip(edges[::2], edges[1::2]):
                    s = offsets[a]
                    e = offsets[b - 1]
                    tau_s = geom.tau(s)
                    line = int(np.floor(tau_s / spec.scan_period))
                    if sub is not None and s - sub[1] <= dt * 1.5:
                        sub = (sub[0], e, sub[2])
                    else:
                        if sub is not None:
                            _emit(sub)
                        sub = (float(s), float(e), line)
            if sub is not None:
                _emit(sub)
        per_sat.append((elements.satellite_id, spans))
    return _finalize_schedule(per_sat, tx_id, (start, end), policy)


def availability(schedule: DarkSchedule,
                 dark_mode: str = "paused") -> AvailabilityReport:
    """White/dark-space accounting for a schedule.

    dark_fraction is merged dark time over the window; the ratio is
    white/dark (infinite for an empty schedule).  Per-satellite dark seconds
    follow the interval attribution.
    """
    window_s = schedule.window_seconds()
    dark_s = schedule.total_dark_seconds()
    dark_fraction = dark_s / window_s
    white_fraction = 1.0 - dark_fraction
    ratio = float("inf") if dark_s == 0 else white_fraction / dark_fraction
    breakdown = {}
    for iv in schedule.intervals:
        breakdown[iv.satellite_id] = (breakdown.get(iv.satellite_id, 0.0)
                                      + iv.duration)
    return AvailabilityReport(
        white_fraction=white_fraction,
        dark_fraction=dark_fraction,
        white_to_dark_ratio=ratio,
        per_satellite_breakdown=breakdown,
        dark_mode=dark_mode,
    )


# --- serialization -----------------------------------------------------------

SCHEDULE_CSV_HEADER = "tx_id,satellite_id,scan_line_index,start_utc,end_utc,policy_kind"


def _iso(t: datetime) -> str:
    return t.isoformat(timespec="microseconds").replace("+00:00", "Z")


def write_schedule_csv(schedule: DarkSchedule, path,
                       provenance: Sequence[str] = ()) -> None:
    """CSV schedule; provenance lines become leading '#' comments."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        fh.write(SCHEDULE_CSV_HEADER + "\n")
        for iv in schedule.intervals:
            fh.write(",".join([
                schedule.tx_id,
                iv.satellite_id,
                str(iv.scan_line_index),
                _iso(iv.start),
                _iso(iv.end),
                schedule.policy.kind.value,
            ]) + "\n")


def write_schedule_jsonl(schedule: DarkSchedule, path,
                         provenance: dict = None) -> None:
    """JSONL mirror of the CSV; an optional provenance record leads."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if provenance is not None:
            fh.write(json.dumps({"provenance": provenance},
                                sort_keys=True) + "\n")
        for iv in schedule.intervals:
            fh.write(json.dumps({
                "tx_id": schedule.tx_id,
                "satellite_id": iv.satellite_id,
                "scan_line_index": iv.scan_line_index,
                "start_utc": _iso(iv.start),
                "end_utc": _iso(iv.end),
                "policy_kind": schedule.policy.kind.value,
            }, sort_keys=True) + "\n")
