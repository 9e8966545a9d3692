"""Dark-interval engine vs oracle, scheduling properties, availability."""
from datetime import timedelta

import numpy as np
import pytest

from darkspace.errors import (EmptyConstellation, NotPhaseLocked,
                              WindowTooLarge)
from darkspace.geofence import (SCHEDULE_CSV_HEADER, availability,
                                brute_force_oracle, dark_intervals,
                                write_schedule_csv, write_schedule_jsonl)
from darkspace.orbit import GroundPoint, propagate
from darkspace.radiometer import BufferPolicy, PolicyKind
from darkspace.timeutil import add_seconds

from helpers import (EPOCH, random_leo_elements, schedules_match,
                     transmitter_near_track)

PIXEL = BufferPolicy(PolicyKind.PIXEL_LEVEL, 2.0)
SCANLINE = BufferPolicy(PolicyKind.SCAN_LINE, 2.0)


@pytest.fixture
def pass_setup(leo_tle, atms):
    """A transmitter directly under a pass, with a 20-minute window."""
    t_mark = add_seconds(leo_tle.epoch, 40 * 60)
    lat, lon, _ = propagate(leo_tle, t_mark).geodetic
    tx = GroundPoint(lat, lon, 20.0)
    window = (add_seconds(leo_tle.epoch, 30 * 60),
              add_seconds(leo_tle.epoch, 50 * 60))
    return tx, [(leo_tle, atms)], window


def test_engine_matches_oracle_on_pass(pass_setup):
    tx, sats, window = pass_setup
    engine = dark_intervals(tx, sats, window, PIXEL)
    oracle = brute_force_oracle(tx, sats, window, PIXEL, dt=0.005)
    assert len(engine.intervals) > 0
    ok, detail = schedules_match(engine, oracle)
    assert ok, detail


def test_engine_matches_oracle_scanline(pass_setup):
    tx, sats, window = pass_setup
    engine = dark_intervals(tx, sats, window, SCANLINE)
    oracle = brute_force_oracle(tx, sats, window, SCANLINE, dt=0.05)
    ok, detail = schedules_match(engine, oracle, tol_s=0.05)
    assert ok, detail


def test_no_visibility_means_empty(leo_tle, atms):
    """Transmitter on the opposite side of the Earth from the pass."""
    t_mark = add_seconds(leo_tle.epoch, 40 * 60)
    lat, lon, _ = propagate(leo_tle, t_mark).geodetic
    antipode = GroundPoint(-lat, ((lon + 360.0) % 360.0) - 180.0, 0.0)
    window = (add_seconds(leo_tle.epoch, 35 * 60),
              add_seconds(leo_tle.epoch, 45 * 60))
    sched = dark_intervals(antipode, [(leo_tle, atms)], window, PIXEL)
    assert sched.intervals == ()
    rep = availability(sched)
    assert rep.white_fraction == 1.0
    assert rep.white_to_dark_ratio == float("inf")


def test_interval_durations_bounded(pass_setup):
    tx, sats, window = pass_setup
    sched = dark_intervals(tx, sats, window, PIXEL)
    for iv in sched.intervals:
        assert iv.duration <= 1.0
    # Typical duration is on the order of a hundred milliseconds.
    durations = sorted(iv.duration for iv in sched.intervals)
    assert durations[len(durations) // 2] < 0.6


def test_scanline_superset_of_pixel(pass_setup):
    tx, sats, window = pass_setup
    px = dark_intervals(tx, sats, window, PIXEL)
    sl = dark_intervals(tx, sats, window, SCANLINE)
    for iv in px.intervals:
        assert any(o.start <= iv.start and iv.end <= o.end
                   for o in sl.intervals), iv


def test_buffer_monotonicity(pass_setup):
    tx, sats, window = pass_setup
    tight = dark_intervals(tx, sats, window,
                           BufferPolicy(PolicyKind.PIXEL_LEVEL, 1.0))
    loose = dark_intervals(tx, sats, window,
                           BufferPolicy(PolicyKind.PIXEL_LEVEL, 2.5))
    assert loose.total_dark_seconds() >= tight.total_dark_seconds()
    for iv in tight.intervals:
        assert any(o.start <= iv.start and iv.end <= o.end
                   for o in loose.intervals)


def test_temporal_pad_extends_and_merges(pass_setup):
    tx, sats, window = pass_setup
    plain = dark_intervals(tx, sats, window, PIXEL)
    padded_policy = BufferPolicy(PolicyKind.PIXEL_LEVEL, 2.0,
                                 temporal_pad=2.0)
    padded = dark_intervals(tx, sats, window, padded_policy)
    assert padded.total_dark_seconds() > plain.total_dark_seconds()
    assert len(padded.intervals) <= len(plain.intervals)
    for iv in plain.intervals:
        assert any(o.start <= iv.start and iv.end <= o.end
                   for o in padded.intervals)


def test_window_split_concatenation(pass_setup):
    """Splitting the window at a quiet moment and concatenating matches."""
    tx, sats, window = pass_setup
    whole = dark_intervals(tx, sats, window, PIXEL)
    # Pick a split point in a large white gap.
    gaps = []
    cursor = window[0]
    for iv in whole.intervals:
        gaps.append(((iv.start - cursor).total_seconds(), cursor, iv.start))
        cursor = iv.end
    gaps.append(((window[1] - cursor).total_seconds(), cursor, window[1]))
    _, lo, hi = max(gaps)
    split = add_seconds(lo, (hi - lo).total_seconds() / 2)

    first = dark_intervals(tx, sats, (window[0], split), PIXEL)
    second = dark_intervals(tx, sats, (split, window[1]), PIXEL)
    combined = list(first.intervals) + list(second.intervals)
    assert len(combined) == len(whole.intervals)
    for a, b in zip(combined, whole.intervals):
        assert abs((a.start - b.start).total_seconds()) < 1e-5
        assert abs((a.end - b.end).total_seconds()) < 1e-5


def test_adding_satellite_never_decreases_dark(atms):
    rng = np.random.default_rng(42)
    els_a = random_leo_elements(rng, 90001)
    els_b = random_leo_elements(rng, 90002)
    window = (EPOCH, add_seconds(EPOCH, 6 * 3600))
    tx = transmitter_near_track(rng, els_a, window, max_cross_km=300.0)
    one = dark_intervals(tx, [(els_a, atms)], window, SCANLINE)
    both = dark_intervals(tx, [(els_a, atms), (els_b, atms)], window,
                          SCANLINE)
    assert (availability(both).dark_fraction
            >= availability(one).dark_fraction)


def test_schedule_determinism(pass_setup):
    tx, sats, window = pass_setup
    a = dark_intervals(tx, sats, window, PIXEL)
    b = dark_intervals(tx, sats, window, PIXEL)
    assert a == b


def test_oracle_refinement_keeps_intervals(pass_setup):
    tx, sats, window = pass_setup
    coarse = brute_force_oracle(tx, sats, window, PIXEL, dt=0.02)
    fine = brute_force_oracle(tx, sats, window, PIXEL, dt=0.01)
    # Refining the grid never loses an interval found at the coarser step.
    for iv in coarse.intervals:
        assert any(f.start <= iv.end and iv.start <= f.end
                   for f in fine.intervals)


def test_validation_errors(pass_setup, amsua, leo_tle):
    tx, sats, window = pass_setup
    with pytest.raises(EmptyConstellation):
        dark_intervals(tx, [], window, PIXEL)
    with pytest.raises(WindowTooLarge):
        dark_intervals(tx, sats, (window[0],
                                  window[0] + timedelta(days=31)), PIXEL)
    with pytest.raises(WindowTooLarge):
        dark_intervals(tx, sats, (window[1], window[0]), PIXEL)
    with pytest.raises(NotPhaseLocked):
        dark_intervals(tx, [(leo_tle, amsua)], window, PIXEL)
    # Scan-line policy is the legal fallback for unlocked scanners.
    sched = dark_intervals(tx, [(leo_tle, amsua)],
                           (window[0], add_seconds(window[0], 600.0)),
                           SCANLINE)
    assert sched.policy.kind is PolicyKind.SCAN_LINE


def test_availability_full_window(pass_setup):
    tx, sats, window = pass_setup
    sched = dark_intervals(tx, sats, window, PIXEL)
    rep = availability(sched)
    assert rep.white_fraction + rep.dark_fraction == 1.0
    assert rep.per_satellite_breakdown[leo_id(sats)] == pytest.approx(
        sched.total_dark_seconds())
    migrated = availability(sched, dark_mode="migrated")
    assert migrated.effective_availability == 1.0


def leo_id(sats):
    return sats[0][0].satellite_id


def test_availability_single_interval_covering_window(pass_setup):
    from darkspace.geofence import DarkInterval, DarkSchedule
    _, sats, window = pass_setup
    sched = DarkSchedule(
        tx_id="tx", intervals=(DarkInterval(window[0], window[1],
                                            "SAT", 0),),
        window=window, policy=PIXEL)
    rep = availability(sched)
    assert rep.dark_fraction == 1.0
    assert rep.white_fraction == 0.0
    assert rep.white_to_dark_ratio == 0.0


def test_schedule_serialization(tmp_path, pass_setup):
    tx, sats, window = pass_setup
    sched = dark_intervals(tx, sats, window, PIXEL)
    csv_path = tmp_path / "sched.csv"
    write_schedule_csv(sched, csv_path, provenance=["seed=1"])
    lines = csv_path.read_text().splitlines()
    data_lines = [l for l in lines if not l.startswith("#")]
    assert data_lines[0] == SCHEDULE_CSV_HEADER
    assert len(data_lines) == 1 + len(sched.intervals)
    assert data_lines[1].startswith("tx,")

    jsonl_path = tmp_path / "sched.jsonl"
    write_schedule_jsonl(sched, jsonl_path, provenance={"seed": 1})
    import json
    rows = [json.loads(l) for l in jsonl_path.read_text().splitlines()]
    assert "provenance" in rows[0]
    assert len(rows) == 1 + len(sched.intervals)
    assert rows[1]["policy_kind"] == "pixel"
