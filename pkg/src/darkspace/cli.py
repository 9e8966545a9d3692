"""Command line interface.

Subcommands: darkspaces, linkbudget, itu-sim, experiment, validate-tle.
Every data file carries a provenance block (config hash, seed, tool
version) so a run can be reproduced exactly; nothing is written outside
--out-dir.  Exit codes: 0 success, 2 configuration/validation error,
3 computation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .errors import ComputeError, ConfigError, DarkspaceError
from .experiment import clearance_band, exclusion_records, plan_experiment, \
    safety_audit
from .geofence import (availability, dark_intervals, write_schedule_csv,
                       write_schedule_jsonl)
from .linkbudget import evaluate, fspl_db, required_tx_power, total_loss_db
from .orbit import GroundPoint, propagate_many, state_from_geodetic, \
    topocentric, frames, load_tle_file
from .propagation import (DeploymentArrays, GeoBox, PathModel,
                          TransmitterKind, TransmitterSpec,
                          aggregate_interference, compliance,
                          generate_deployment, read_deployment_jsonl,
                          write_deployment_jsonl,
                          write_interference_grid_csv)
from .radiometer import ScanSample, footprints_batch
from .timeutil import add_seconds


def _iso(t):
    return t.isoformat(timespec="microseconds").replace("+00:00", "Z")


def _provenance_lines(prov: dict):
    return [f"{k}={prov[k]}" for k in sorted(prov)]


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finite_or_none(value: float):
    return None if value in (float("inf"), float("-inf")) else value


# --- subcommands --------------------------------------------------------------


def cmd_darkspaces(args) -> int:
    config = ScenarioConfig.load(args.config)
    config.apply_overrides(seed=args.seed, policy=args.policy)
    out = _out_dir(args)
    prov = config.provenance("darkspaces")

    sats = config.satellites()
    policy = config.policy()
    window = config.window()
    ground_alt = config.ground_altitude()

    schedules = []
    for tx_id, point, _ in config.transmitters():
        schedules.append(dark_intervals(point, sats, window, policy,
                                        tx_id=tx_id,
                                        ground_altitude=ground_alt))

    csv_path = out / "schedule.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        for line in _provenance_lines(prov):
            fh.write(f"# {line}\n")
        fh.write("tx_id,satellite_id,scan_line_index,start_utc,end_utc,"
                 "policy_kind\n")
        for sched in schedules:
            for iv in sched.intervals:
                fh.write(",".join([
                    sched.tx_id, iv.satellite_id, str(iv.scan_line_index),
                    _iso(iv.start), _iso(iv.end), policy.kind.value]) + "\n")

    with open(out / "schedule.jsonl", "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(json.dumps({"provenance": prov}, sort_keys=True) + "\n")
        for sched in schedules:
            for iv in sched.intervals:
                fh.write(json.dumps({
                    "tx_id": sched.tx_id,
                    "satellite_id": iv.satellite_id,
                    "scan_line_index": iv.scan_line_index,
                    "start_utc": _iso(iv.start),
                    "end_utc": _iso(iv.end),
                    "policy_kind": policy.kind.value,
                }, sort_keys=True) + "\n")

    reports = {}
    for sched in schedules:
        rep = availability(sched)
        reports[sched.tx_id] = {
            "white_fraction": rep.white_fraction,
            "dark_fraction": rep.dark_fraction,
            "white_to_dark_ratio": _finite_or_none(rep.white_to_dark_ratio),
            "per_satellite_dark_seconds": rep.per_satellite_breakdown,
            "dark_mode": rep.dark_mode,
            "effective_availability": rep.effective_availability,
            "n_intervals": len(sched.intervals),
            "dark_seconds": sched.total_dark_seconds(),
        }
    _write_json(out / "availability.json", {
        "provenance": prov,
        "policy": {"kind": policy.kind.value,
                   "buffer_multiplier": policy.buffer_multiplier,
                   "temporal_pad_s": policy.temporal_pad},
        "window": {"start": _iso(window[0]), "end": _iso(window[1])},
        "transmitters": reports,
    })
    total = sum(len(s.intervals) for s in schedules)
    print(f"darkspaces: {total} dark intervals across "
          f"{len(schedules)} transmitter(s) -> {out}")
    if total == 0:
        print("warning: no dark intervals in window (no passes subtend "
              "any transmitter)")
    return 0


def cmd_linkbudget(args) -> int:
    config = ScenarioConfig.load(args.config)
    config.apply_overrides(seed=args.seed)
    out = _out_dir(args)
    prov = config.provenance("linkbudget")

    params = config.linkbudget_params()
    geometry = config.linkbudget_geometry(args.geometry)

    frequency = params["frequency_hz"]
    bandwidth = params["bandwidth_hz"]
    if frequency is None or bandwidth is None:
        raise ConfigError("missing config key: linkbudget.frequency_hz / "
                          "linkbudget.bandwidth_hz")

    sat_node = geometry["satellite"]
    gnd_node = geometry["ground"]
    # Fixed-geometry evaluation needs a nominal instant only.
    t = (config.window()[0] if "window" in config.data
         else datetime(2000, 1, 1, tzinfo=timezone.utc))
    sat = state_from_geodetic(t, float(sat_node["lat"]),
                              float(sat_node["lon"]),
                              float(sat_node["alt_km"]) * 1000.0)
    ground = GroundPoint(float(gnd_node["lat"]), float(gnd_node["lon"]),
                         float(gnd_node.get("alt_m", 0.0)))
    look = topocentric(sat, ground)
    if look.elevation <= 0:
        raise ComputeError("geometry puts the satellite below the horizon")

    atmosphere = config.atmosphere("linkbudget")
    atm_db = (float(atmosphere.loss_db(look.elevation))
              if atmosphere is not None else 0.0)
    # Regression fixtures may pin stated loss components instead of the
    # geometry-derived ones.
    fspl_value = (float(geometry["fspl_db"]) if "fspl_db" in geometry
                  else float(fspl_db(look.slant_range, frequency)))
    if "atmosphere_db" in geometry:
        atm_db = float(geometry["atmosphere_db"])
    chain = total_loss_db(
        fspl=fspl_value,
        atmosphere=atm_db,
        polarization=params["polarization_db"],
        g_tx=params["g_tx_dbi"],
        g_rx=params["g_rx_dbi"],
    )
    budget = evaluate(params["p_on_dbm"], chain, params["n_temp_k"],
                      bandwidth, p_h2o_w=params["p_h2o_watts"],
                      p_h2o_noise_multiplier=params["p_h2o_noise_multiplier"])
    _write_json(out / "linkbudget.json", {
        "provenance": prov,
        "geometry": args.geometry,
        "elevation_deg": look.elevation,
        "azimuth_deg": look.azimuth,
        "slant_range_m": look.slant_range,
        "frequency_hz": frequency,
        "bandwidth_hz": bandwidth,
        "loss": {
            "fspl_db": chain.fspl,
            "atmosphere_db": chain.atmosphere,
            "polarization_db": chain.polarization,
            "g_tx_dbi": chain.g_tx,
            "g_rx_dbi": chain.g_rx,
            "total_db": chain.total,
        },
        "p_on_dbm": budget.p_on,
        "p_noise_w": budget.p_noise,
        "p_h2o_w": budget.p_h2o,
        "p_received_dbm": budget.p_received,
        "on_off_ratio": budget.on_off_ratio,
        "required_tx_power_w_for_ratio_10": required_tx_power(
            10.0, chain.total, budget.p_noise, budget.p_h2o),
    })
    print(f"linkbudget[{args.geometry}]: total {chain.total:.1f} dB, "
          f"received {budget.p_received:.1f} dBm -> {out}")
    return 0


def _itu_pixels(config, max_pixels, bbox):
    """Radiometer pixels over the window whose centers fall in the box."""
    elements, spec = config.satellites()[0]
    start, end = config.window()
    duration = (end - start).total_seconds()
    base = (start - elements.epoch).total_seconds()

    n_lines = int(np.ceil(duration / spec.scan_period)) + 2
    line0 = int(np.floor(base / spec.scan_period))
    lines = np.repeat(np.arange(line0, line0 + n_lines),
                      spec.samples_per_scan)
    idx = np.tile(np.arange(spec.samples_per_scan), n_lines)
    tau = lines * spec.scan_period + idx * spec.sample_dwell
    offsets = tau - base
    keep = (offsets >= 0) & (offsets <= duration)
    lines, idx, offsets = lines[keep], idx[keep], offsets[keep]

    r, v = propagate_many(elements, start, offsets)
    omega = np.array([0.0, 0.0, frames.OMEGA_EARTH]).reshape(3, 1)
    v_inertial = v + np.cross(omega, r, axis=0)

    from .radiometer import _footprint_arrays
    boresight = spec.boresight_of(idx)
    arrays = _footprint_arrays(r, v_inertial, boresight, spec,
                               config.ground_altitude())
    in_box = ((arrays["center_lat"] >= bbox.lat_min)
              & (arrays["center_lat"] <= bbox.lat_max)
              & (arrays["center_lon"] >= bbox.lon_min)
              & (arrays["center_lon"] <= bbox.lon_max)
              & ~arrays["miss"])
    sel = np.flatnonzero(in_box)
    if sel.size > max_pixels:
        stride = int(np.ceil(sel.size / max_pixels))
        sel = sel[::stride]

    samples = [ScanSample(int(lines[i]), int(idx[i]),
                          add_seconds(start, float(offsets[i])),
                          float(boresight[i])) for i in sel]
    footprints = footprints_batch(r[:, sel], v_inertial[:, sel], samples,
                                  spec, config.ground_altitude(),
                                  elements.satellite_id)
    from .orbit import SatelliteState
    lat, lon, alt = frames.ecef_to_geodetic(r[:, sel])
    states = [SatelliteState(
        t=samples[k].t,
        position_ecef=tuple(float(x) for x in r[:, i]),
        velocity_ecef=tuple(float(x) for x in v[:, i]),
        geodetic=(float(np.atleast_1d(lat)[k]), float(np.atleast_1d(lon)[k]),
                  float(np.atleast_1d(alt)[k])),
    ) for k, i in enumerate(sel)]
    return spec, footprints, states


def cmd_itu_sim(args) -> int:
    config = ScenarioConfig.load(args.config)
    config.apply_overrides(seed=args.seed, model=args.model,
                           gamma=args.gamma, threshold=args.threshold,
                           quantile=args.quantile)
    out = _out_dir(args)
    prov = config.provenance("itu-sim")
    itu = config.itu_params()

    try:
        model = PathModel(itu["model"])
    except ValueError:
        raise ConfigError(f"itu.model: expected 'los' or 'two-ray', got "
                          f"{itu['model']!r}") from None

    dep_node = itu["deployment"]
    if dep_node is None:
        raise ConfigError("missing config key: itu.deployment")
    if "path" in dep_node:
        dep_path = config._resolve_path(dep_node["path"])
        if not dep_path.exists():
            raise ConfigError(f"itu.deployment.path: no such file: "
                              f"{dep_path}")
        deployment = read_deployment_jsonl(dep_path)
        bbox_node = dep_node.get("bbox")
        if bbox_node is None:
            raise ConfigError("missing config key: itu.deployment.bbox "
                              "(pixel sampling box)")
    else:
        bbox_node = dep_node.get("bbox")
        if bbox_node is None:
            raise ConfigError("missing config key: itu.deployment.bbox")
        scenario = dep_node.get("scenario", "rural")
        bbox = GeoBox(*[float(x) for x in bbox_node])
        deployment = generate_deployment(
            scenario, bbox, config.seed(),
            center_frequency=float(dep_node.get("center_frequency_hz",
                                                24.0e9)),
            emission_bandwidth=float(dep_node.get("emission_bandwidth_hz",
                                                  200.0e6)))
        write_deployment_jsonl(deployment, out / "deployment.jsonl")
    bbox = GeoBox(*[float(x) for x in bbox_node])

    spec, footprints, states = _itu_pixels(config, itu["max_pixels"], bbox)
    if not footprints:
        raise ComputeError("no radiometer pixels fall inside the area "
                           "during the window")

    arrays = DeploymentArrays(deployment)
    atmosphere = config.atmosphere("itu")
    samples = [
        aggregate_interference(fp, st, arrays, model, spec,
                               atmosphere=atmosphere,
                               reflection_coeff=complex(itu["gamma"]),
                               two_ray_floor_db=itu["two_ray_floor_db"],
                               include_contributors=False)
        for fp, st in zip(footprints, states)]

    report = compliance(samples, threshold=itu["threshold_dbm_mhz"],
                        quantile=itu["quantile"], area_km2=itu["area_km2"])

    write_interference_grid_csv(samples, model, out / "interference_grid.csv",
                                provenance=_provenance_lines(prov))
    _write_json(out / "compliance.json", {
        "provenance": prov,
        "model": model.value,
        "gamma": itu["gamma"],
        "threshold_dbm_mhz": report.threshold,
        "quantile": report.quantile,
        "area_km2": report.area_km2,
        "n_pixels": report.n_pixels,
        "n_transmitters": len(deployment),
        "sampling_scheme": ("all radiometer samples in the window with "
                            "pixel centers inside the bounding box, evenly "
                            "strided to max_pixels"),
        "fraction_compliant": report.fraction_compliant,
        "pass": report.passed,
    })
    print(f"itu-sim: {report.n_pixels} pixels, fraction compliant "
          f"{report.fraction_compliant:.6f}, pass={report.passed} -> {out}")
    return 0


def cmd_experiment(args) -> int:
    config = ScenarioConfig.load(args.config)
    config.apply_overrides(seed=args.seed, policy=args.policy)
    out = _out_dir(args)
    prov = config.provenance("experiment")

    exp = config.experiment_params()
    lb = config.linkbudget_params()
    sats = config.satellites()
    elements, spec = sats[0]
    window = config.window()

    tx_id, point, raw = config.transmitters()[0]
    tx = TransmitterSpec(
        id=tx_id,
        location=point,
        antenna_height=float(raw.get("antenna_height_m", 2.0)),
        eirp_density=float(raw.get("eirp_density_dbm_mhz", 0.0)),
        center_frequency=spec.center_frequency,
        emission_bandwidth=spec.bandwidth,
        kind=TransmitterKind.FLASHLIGHT,
    )

    policy = config.policy() if "policy" in config.data else None
    plan = plan_experiment(tx, (elements, spec), window,
                           overlap_threshold=exp["overlap_threshold"],
                           max_pulse=exp["max_pulse_s"],
                           policy=policy,
                           ground_altitude=config.ground_altitude())

    audit = safety_audit(plan, p_on_dbm=lb["p_on_dbm"],
                         damage_threshold_dbm=exp["damage_threshold_dbm"],
                         g_tx_dbi=lb["g_tx_dbi"], g_rx_dbi=lb["g_rx_dbi"],
                         polarization_db=lb["polarization_db"],
                         atmosphere=config.atmosphere("experiment"))
    band = clearance_band(spec.center_frequency, spec.bandwidth,
                          exp["clearance_n"])
    records = exclusion_records(plan)

    def sample_dict(s):
        return {"scan_line_index": s.scan_line_index,
                "sample_index": s.sample_index,
                "t": _iso(s.t),
                "boresight_deg": s.boresight_angle}

    _write_json(out / "plan.json", {
        "provenance": prov,
        "transmitter": {"id": tx.id, "lat": tx.location.latitude,
                        "lon": tx.location.longitude,
                        "alt_m": tx.location.altitude,
                        "kind": tx.kind.value},
        "satellite_id": plan.satellite_id,
        "radiometer": spec.name,
        "mode": plan.mode,
        "window": {"start": _iso(plan.window[0]),
                   "end": _iso(plan.window[1])},
        "max_pulse_s": plan.max_pulse,
        "overlap_threshold": plan.overlap_threshold,
        "clearance_band_hz": list(band),
        "pulses": [{
            "on_start": _iso(p.on_start),
            "on_end": _iso(p.on_end),
            "duration_s": p.duration,
            "target": sample_dict(p.target),
            "off_reference": sample_dict(p.off_reference),
            "overlap_fraction": p.overlap_fraction,
        } for p in plan.pulses],
        "diagnostics": plan.diagnostics,
        "audit": {
            "pass": audit.passed,
            "max_received_dbm": _finite_or_none(audit.max_received_dbm),
            "margin_db": _finite_or_none(audit.margin_db),
            "damage_threshold_dbm": audit.damage_threshold_dbm,
        },
        "checklist": list(plan.checklist),
    })

    with open(out / "pulses.csv", "w", encoding="utf-8", newline="\n") as fh:
        for line in _provenance_lines(prov):
            fh.write(f"# {line}\n")
        fh.write("tx_id,satellite_id,on_start_utc,on_end_utc,duration_s,"
                 "target_line,target_sample,off_line,off_sample,"
                 "overlap_fraction\n")
        for p in plan.pulses:
            fh.write(",".join([
                tx.id, plan.satellite_id, _iso(p.on_start), _iso(p.on_end),
                f"{p.duration:.6f}", str(p.target.scan_line_index),
                str(p.target.sample_index),
                str(p.off_reference.scan_line_index),
                str(p.off_reference.sample_index),
                f"{p.overlap_fraction:.4f}"]) + "\n")

    with open(out / "exclusions.csv", "w", encoding="utf-8",
              newline="\n") as fh:
        for line in _provenance_lines(prov):
            fh.write(f"# {line}\n")
        fh.write("satellite_id,scan_line_index,sample_index,start_utc,"
                 "end_utc,reason\n")
        for rec in records:
            fh.write(",".join([
                rec.satellite_id, str(rec.scan_line_index),
                str(rec.sample_index), _iso(rec.start), _iso(rec.end),
                rec.reason]) + "\n")

    print(f"experiment: {len(plan.pulses)} pulses, audit pass={audit.passed}"
          f" -> {out}")
    if not plan.pulses:
        print("warning: empty plan (no passes over the transmitter in the "
              "window)")
    return 0


def cmd_validate_tle(args) -> int:
    elements = load_tle_file(args.tle)
    print(f"{args.tle}: OK")
    print(f"  satellite  {elements.satellite_id} "
          f"(catalog {elements.catalog_number})")
    print(f"  epoch      {_iso(elements.epoch)}")
    print(f"  inclination {elements.inclination:.4f} deg, "
          f"raan {elements.raan:.4f} deg, e {elements.eccentricity:.7f}")
    print(f"  mean motion {elements.mean_motion:.8f} rev/day")
    print(f"  checksums  {'ok' if elements.element_set_checksum_ok else 'BAD'}")
    return 0


# --- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkspace",
        description="Spectrum coexistence toolkit for passive microwave "
                    "radiometers: dark-space geofencing, link budgets, "
                    "interference compliance, flashlight experiment plans.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, geometry=False):
        p.add_argument("--config", required=True, help="scenario JSON")
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override config seed")

    p = sub.add_parser("darkspaces",
                       help="dark-space schedule and availability")
    common(p)
    p.add_argument("--policy", choices=["pixel", "scanline"], default=None)
    p.set_defaults(func=cmd_darkspaces)

    p = sub.add_parser("linkbudget", help="evaluate one link geometry")
    common(p)
    p.add_argument("--geometry", default="default",
                   help="name under linkbudget.geometries")
    p.set_defaults(func=cmd_linkbudget)

    p = sub.add_parser("itu-sim",
                       help="aggregate-interference compliance simulation")
    common(p)
    p.add_argument("--model", choices=["los", "two-ray"], default=None)
    p.add_argument("--gamma", type=float, default=None,
                   help="ground reflection coefficient (real part)")
    p.add_argument("--threshold", type=float, default=None,
                   help="compliance threshold, dBm/MHz")
    p.add_argument("--quantile", type=float, default=None)
    p.set_defaults(func=cmd_itu_sim)

    p = sub.add_parser("experiment", help="plan a flashlight campaign")
    common(p)
    p.add_argument("--policy", choices=["pixel", "scanline"], default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate-tle", help="parse and validate a TLE file")
    p.add_argument("tle", help="path to a TLE file")
    p.set_defaults(func=cmd_validate_tle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ComputeError, DarkspaceError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
