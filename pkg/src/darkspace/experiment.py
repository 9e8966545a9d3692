"""Flashlight measurement planning: ON/OFF pulses against predicted passes.

A plan fires the ground transmitter exactly while the radiometer pixel looks
at it (the dual of the geofencing pause rule), binds every ON pixel to the
overlapping pixel one scan line later as the OFF reference, audits worst
case received power, and emits the pixel-exclusion records that keep
contaminated samples out of downstream weather products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

import numpy as np

from .errors import ConfigError, NegativeLowEdge
from .geofence import dark_intervals
from .linkbudget import LossChain, fspl_db
from .orbit import (GroundPoint, OrbitalElements, propagate, topocentric)
from .propagation import TransmitterSpec
from .radiometer import (BufferPolicy, PolicyKind, RadiometerSpec,
                         ScanSample, pixel_footprint, scan_phase)
from .timeutil import add_seconds, ensure_utc


class PairingMode(Enum):
    SAME_RADIOMETER_ADJACENT_LINES = "SameRadiometerAdjacentLines"
    CROSS_SATELLITE = "CrossSatellite"


#: Safety criteria that are process steps, not computations; emitted with
#: every plan so the paperwork cannot be forgotten.
REGULATORY_CHECKLIST = (
    "Review the experimental configuration and radiated-power audit with "
    "the satellite operator.",
    "Review the test location and frequencies with the NTIA and FCC.",
    "Deploy the pixel-exclusion records to the NWP ingest filters before "
    "any transmission.",
)


@dataclass(frozen=True)
class Pulse:
    """One transmitter-ON window bound to its ON pixel and OFF reference."""
    on_start: datetime
    on_end: datetime
    target: ScanSample
    off_reference: ScanSample
    overlap_fraction: float

    @property
    def duration(self) -> float:
        return (self.on_end - self.on_start).total_seconds()


@dataclass(frozen=True)
class FlashlightPlan:
    """A complete, deterministic measurement plan for one transmitter."""
    tx: TransmitterSpec
    elements: OrbitalElements
    spec: RadiometerSpec
    policy: BufferPolicy
    window: tuple[datetime, datetime]
    pulses: tuple
    max_pulse: float
    overlap_threshold: float
    mode: str
    diagnostics: dict
    checklist: tuple = REGULATORY_CHECKLIST

    @property
    def satellite_id(self) -> str:
        return self.elements.satellite_id


@dataclass(frozen=True)
class MeasuredSample:
    """An observed (or simulated) radiometer power keyed by scan sample."""
    satellite_id: str
    scan_line_index: int
    sample_index: int
    power_w: float
    t: datetime = None
    center: GroundPoint = None
    loss: LossChain = None

    @property
    def key(self):
        return (self.satellite_id, self.scan_line_index, self.sample_index)


@dataclass(frozen=True)
class OnOffPair:
    on_sample_power: float
    off_sample_power: float
    delta_t: float
    mode: PairingMode
    loss_correction: float = 0.0


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple
    unmatched: tuple

    @property
    def unmatched_count(self) -> int:
        return len(self.unmatched)


@dataclass(frozen=True)
class ExclusionRecord:
    satellite_id: str
    scan_line_index: int
    sample_index: int
    start: datetime
    end: datetime
    reason: str


@dataclass(frozen=True)
class SafetyReport:
    passed: bool
    max_received_dbm: float
    margin_db: float
    damage_threshold_dbm: float


def clearance_band(f_c: float, delta_f_c: float, n: int) -> tuple[float, float]:
    """Frequency band [f_c - n*bw, f_c + n*bw] that must be radio quiet."""
    if n < 0:
        raise ConfigError("n must be >= 0")
    if f_c <= n * delta_f_c:
        raise NegativeLowEdge(
            f"f_c must exceed n*delta_f_c ({f_c} <= {n * delta_f_c})")
    return (f_c - n * delta_f_c, f_c + n * delta_f_c)


def ellipse_overlap_fraction(fp_on, fp_off, n_radial: int = 24,
                             n_angular: int = 48) -> float:
    """Fraction of the ON ellipse's area also inside the OFF ellipse.

    Deterministic area sampling: points uniform in area over the ON ellipse
    (uniform in r^2 and angle), each tested against the OFF ellipse in its
    own construction frame.
    """
    geom_on = fp_on._geom
    center_on = np.array(geom_on.center_ecef)
    maj_on = np.array(geom_on.u_major)
    min_on = np.array(geom_on.u_minor)

    r = np.sqrt((np.arange(n_radial) + 0.5) / n_radial)
    th = (np.arange(n_angular) + 0.5) * (2.0 * math.pi / n_angular)
    rr, tt = np.meshgrid(r, th)
    x = (rr * np.cos(tt)).ravel() * fp_on.semi_major
    y = (rr * np.sin(tt)).ravel() * fp_on.semi_minor
    points = (center_on.reshape(3, 1)
              + maj_on.reshape(3, 1) * x
              + min_on.reshape(3, 1) * y)

    geom_off = fp_off._geom
    delta = points - np.array(geom_off.center_ecef).reshape(3, 1)
    xo = np.array(geom_off.u_major) @ delta
    yo = np.array(geom_off.u_minor) @ delta
    inside = ((xo / fp_off.semi_major) ** 2
              + (yo / fp_off.semi_minor) ** 2) <= 1.0
    return float(np.mean(inside))


def _off_reference(sample: ScanSample, spec: RadiometerSpec) -> ScanSample:
    """The overlapping pixel one scan line later (same sample slot)."""
    return ScanSample(
        scan_line_index=sample.scan_line_index + 1,
        sample_index=sample.sample_index,
        t=add_seconds(sample.t, spec.scan_period),
        boresight_angle=sample.boresight_angle,
    )


def _pulse_dwells(spec: RadiometerSpec, t0, on_start, on_end):
    """(line, sample) keys of every dwell the pulse would transmit into."""
    dwell = spec.sample_dwell
    keys = []
    tau = (on_start - t0).total_seconds()
    tau_end = (on_end - t0).total_seconds()
    while tau < tau_end:
        line = math.floor(tau / spec.scan_period)
        frac = tau - line * spec.scan_period
        idx = min(int(frac / dwell), spec.samples_per_scan - 1)
        keys.append((line, idx))
        tau = line * spec.scan_period + (idx + 1) * dwell + 1.0e-9
    return keys


def plan_experiment(tx: TransmitterSpec,
                    sat: tuple[OrbitalElements, RadiometerSpec],
                    window: tuple[datetime, datetime],
                    overlap_threshold: float = 0.5,
                    max_pulse: float = None,
                    policy: BufferPolicy = None,
                    ground_altitude: float = 0.0) -> FlashlightPlan:
    """Plan ON pulses for every predicted pixel pass over the transmitter.

    Phase-locked radiometers get pixel-level pulses (default cap 0.1 s);
    otherwise whole scan lines are used with a pulse of one scan period.
    Pulses whose ON/OFF pixel overlap falls below the threshold are
    discarded and counted in the diagnostics.
    """
    elements, spec = sat
    if spec.phase_locked:
        mode = "pixel"
        policy = policy or BufferPolicy(PolicyKind.PIXEL_LEVEL, 2.0)
        max_pulse = 0.1 if max_pulse is None else max_pulse
    else:
        mode = "scanline"
        policy = policy or BufferPolicy(PolicyKind.SCAN_LINE, 2.0)
        max_pulse = spec.scan_period if max_pulse is None else max_pulse

    schedule = dark_intervals(tx.location, [sat], window, policy,
                              tx_id=tx.id, ground_altitude=ground_altitude)
    pulses = []
    discarded_overlap = 0
    discarded_off_conflict = 0
    contaminated = set()
    reserved_off = set()
    for iv in schedule.intervals:
        on_start = iv.start
        on_end = min(iv.end, add_seconds(on_start, max_pulse))
        if mode == "pixel":
            mid = add_seconds(on_start, (on_end - on_start).total_seconds()
                              / 2.0)
            target = scan_phase(spec, mid, elements.epoch)
            dwells = _pulse_dwells(spec, elements.epoch, on_start, on_end)
        else:
            line_start = add_seconds(
                elements.epoch, iv.scan_line_index * spec.scan_period)
            target = ScanSample(iv.scan_line_index, 0, line_start,
                                float(spec.boresight_of(0)))
            dwells = [(iv.scan_line_index, i)
                      for i in range(spec.samples_per_scan)]
        off_ref = _off_reference(target, spec)
        off_key = (off_ref.scan_line_index, off_ref.sample_index)
        off_keys = ({off_key} if mode == "pixel" else
                    {(off_ref.scan_line_index, i)
                     for i in range(spec.samples_per_scan)})

        # The OFF reference is only valid if the flashlight is silent while
        # the radiometer integrates it.  Adjacent-line passes would
        # otherwise contaminate each other's references, so conflicting
        # intervals are skipped (and counted).
        if (any(d in reserved_off for d in dwells)
                or any(k in contaminated for k in off_keys)):
            discarded_off_conflict += 1
            continue

        fp_on = pixel_footprint(propagate(elements, target.t), target, spec,
                                ground_altitude)
        fp_off = pixel_footprint(propagate(elements, off_ref.t), off_ref,
                                 spec, ground_altitude)
        frac = ellipse_overlap_fraction(fp_on, fp_off)
        if frac < overlap_threshold:
            discarded_overlap += 1
            continue
        contaminated.update(dwells)
        reserved_off.update(off_keys)
        pulses.append(Pulse(on_start=on_start, on_end=on_end, target=target,
                            off_reference=off_ref, overlap_fraction=frac))

    return FlashlightPlan(
        tx=tx,
        elements=elements,
        spec=spec,
        policy=policy,
        window=(ensure_utc(window[0]), ensure_utc(window[1])),
        pulses=tuple(pulses),
        max_pulse=max_pulse,
        overlap_threshold=overlap_threshold,
        mode=mode,
        diagnostics={
            "passes_considered": len(schedule.intervals),
            "discarded_overlap": discarded_overlap,
            "discarded_off_conflict": discarded_off_conflict,
        },
    )


def pair_measurements(plan: FlashlightPlan, samples,
                      mode: PairingMode) -> PairingResult:
    """Pair ON pulses with OFF measurements.

    Same-radiometer mode matches each pulse's bound OFF pixel by scan
    sample key; cross-satellite mode matches the nearest pixel center from
    another satellite and applies the loss-chain correction between the two
    geometries.  ON pulses without a usable OFF measurement are returned in
    unmatched, never silently dropped.
    """
    by_key = {s.key: s for s in samples}
    pairs = []
    unmatched = []
    if mode is PairingMode.SAME_RADIOMETER_ADJACENT_LINES:
        for pulse in plan.pulses:
            on_key = (plan.satellite_id, pulse.target.scan_line_index,
                      pulse.target.sample_index)
            off_key = (plan.satellite_id,
                       pulse.off_reference.scan_line_index,
                       pulse.off_reference.sample_index)
            on = by_key.get(on_key)
            off = by_key.get(off_key)
            if on is None or off is None:
                unmatched.append(on_key if off is not None or on is None
                                 else off_key)
                continue
            pairs.append(OnOffPair(
                on_sample_power=on.power_w,
                off_sample_power=off.power_w,
                delta_t=plan.spec.scan_period,
                mode=mode,
                loss_correction=0.0,
            ))
        return PairingResult(tuple(pairs), tuple(unmatched))

    # Cross-satellite: ON samples from this plan's satellite, OFF candidates
    # from any other, matched by pixel-center proximity.
    on_samples = [s for s in samples if s.satellite_id == plan.satellite_id]
    off_candidates = [s for s in samples
                      if s.satellite_id != plan.satellite_id]
    for on in on_samples:
        if on.center is None:
            unmatched.append(on.key)
            continue
        best = None
        best_dist = float("inf")
        for off in off_candidates:
            if off.center is None:
                continue
            d = float(np.linalg.norm(on.center.ecef() - off.center.ecef()))
            if d < best_dist:
                best, best_dist = off, d
        if best is None:
            unmatched.append(on.key)
            continue
        if on.loss is None or best.loss is None:
            raise ConfigError(
                "cross-satellite pairing needs a LossChain on both samples")
        delta_t = (abs((best.t - on.t).total_seconds())
                   if on.t and best.t else float("nan"))
        pairs.append(OnOffPair(
            on_sample_power=on.power_w,
            off_sample_power=best.power_w,
            delta_t=delta_t,
            mode=mode,
            loss_correction=on.loss.total - best.loss.total,
        ))
    return PairingResult(tuple(pairs), tuple(unmatched))


def safety_audit(plan: FlashlightPlan, p_on_dbm: float,
                 damage_threshold_dbm: float,
                 g_tx_dbi: float = 15.0, g_rx_dbi: float = 30.0,
                 polarization_db: float = -3.0,
                 atmosphere=None) -> SafetyReport:
    """Worst-case received power across all pulses vs the damage threshold.

    Worst case means maximum-gain alignment at each pulse's slant geometry;
    the pass criterion is strict (received strictly below threshold).
    """
    max_received = float("-inf")
    for pulse in plan.pulses:
        state = propagate(plan.elements, pulse.on_start)
        look = topocentric(state, plan.tx.location)
        loss = float(fspl_db(look.slant_range, plan.spec.center_frequency))
        if atmosphere is not None and look.elevation > 0:
            loss += float(atmosphere.loss_db(look.elevation))
        loss += polarization_db + g_tx_dbi + g_rx_dbi
        max_received = max(max_received, p_on_dbm + loss)
    return SafetyReport(
        passed=max_received < damage_threshold_dbm,
        max_received_dbm=max_received,
        margin_db=damage_threshold_dbm - max_received,
        damage_threshold_dbm=damage_threshold_dbm,
    )


def exclusion_records(plan: FlashlightPlan) -> list[ExclusionRecord]:
    """One record per pixel whose dwell overlaps an ON pulse.

    Every instant inside a pulse is subtension time by construction, so the
    active pixels are exactly the contaminated ones.  OFF-reference pixels
    are one scan line later than any pulse and are never excluded.
    """
    spec = plan.spec
    dwell = spec.sample_dwell
    t0 = plan.elements.epoch
    records = []
    seen = set()
    for pulse in plan.pulses:
        if plan.mode == "scanline":
            # Whole-line exclusion: the scan phase within the line is not
            # predictable, so every pixel of the line is suspect.
            line = pulse.target.scan_line_index
            for idx in range(spec.samples_per_scan):
                key = (line, idx)
                if key in seen:
                    continue
                seen.add(key)
                start = add_seconds(t0, line * spec.scan_period
                                    + idx * dwell)
                records.append(ExclusionRecord(
                    satellite_id=plan.satellite_id,
                    scan_line_index=line,
                    sample_index=idx,
                    start=start,
                    end=add_seconds(start, dwell),
                    reason="rf-flashlight ON (scan-line mode)",
                ))
            continue
        tau = (pulse.on_start - t0).total_seconds()
        tau_end = (pulse.on_end - t0).total_seconds()
        while tau < tau_end:
            line = math.floor(tau / spec.scan_period)
            frac = tau - line * spec.scan_period
            idx = min(int(frac / dwell), spec.samples_per_scan - 1)
            key = (line, idx)
            if key not in seen:
                seen.add(key)
                start = add_seconds(t0, line * spec.scan_period
                                    + idx * dwell)
                records.append(ExclusionRecord(
                    satellite_id=plan.satellite_id,
                    scan_line_index=line,
                    sample_index=idx,
                    start=start,
                    end=add_seconds(start, dwell),
                    reason="rf-flashlight ON",
                ))
            # Step just past this dwell's end; the nanosecond nudge defeats
            # float ties at the boundary.
            tau = line * spec.scan_period + (idx + 1) * dwell + 1.0e-9
    return records
