"""Cross-track scanning radiometer model.

Maps time to scan phase, scan samples to ground pixel footprints on the
WGS-84 ellipsoid, and decides whether a footprint (or the whole scan-line
swath strip) subtends a ground transmitter.  The footprint math is exact
ray-ellipsoid geometry: the boresight is the satellite's geodetic nadir
rotated about the (inertial) velocity axis by the scan angle, and the pixel
ellipse axes come from intersecting the 3 dB cone's edge rays with the
ellipsoid.

All heavy math is vectorized over samples; the dataclass API wraps single
samples of the same arrays so scalar and batched paths cannot diverge.
"""
from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, NoIntersection, NotPhaseLocked
from .orbit import GroundPoint, SatelliteState, frames
from .timeutil import add_seconds, ensure_utc


class PolicyKind(Enum):
    PIXEL_LEVEL = "pixel"
    SCAN_LINE = "scanline"


@dataclass(frozen=True)
class BufferPolicy:
    """How much protection padding to apply around raw pixel geometry.

    buffer_multiplier inflates the footprint ellipse axes; temporal_pad
    extends every dark interval at both ends.  Pixel-level policies are only
    valid for phase-locked scanners.
    """
    kind: PolicyKind = PolicyKind.PIXEL_LEVEL
    buffer_multiplier: float = 2.0
    temporal_pad: float = 0.0

    def __post_init__(self):
        if self.buffer_multiplier < 1.0:
            raise ValueError("buffer_multiplier must be >= 1")
        if self.temporal_pad < 0.0:
            raise ValueError("temporal_pad must be >= 0")


@dataclass(frozen=True)
class RadiometerSpec:
    """Sensor RF and scan geometry parameters.

    Frequencies in Hz, angles in degrees, scan_period in seconds, n_temp in
    kelvin.  phase_locked means the scan mechanism runs in closed loop with
    the satellite position so individual pixel times are predictable;
    otherwise geofencing must fall back to scan-line granularity.
    """
    name: str
    itu_sensor_id: str
    center_frequency: float
    bandwidth: float
    antenna_max_gain: float
    beamwidth_3db: float
    scan_period: float
    scan_half_angle: float
    samples_per_scan: int
    n_temp: float
    phase_locked: bool

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")
        if not 0 < self.beamwidth_3db < 90:
            raise ValueError("beamwidth_3db must be in (0, 90)")
        if self.scan_period <= 0:
            raise ValueError("scan_period must be > 0")
        if self.samples_per_scan < 1:
            raise ValueError("samples_per_scan must be >= 1")
        if not 0 < self.scan_half_angle < 90:
            raise ValueError("scan_half_angle must be in (0, 90)")

    @property
    def sample_dwell(self) -> float:
        """Seconds spent on one sample."""
        return self.scan_period / self.samples_per_scan

    def boresight_of(self, sample_index: int):
        """Signed cross-track angle of a sample (linear sweep, degrees)."""
        n = self.samples_per_scan
        if n == 1:
            return 0.0 * np.asarray(sample_index)
        step = 2.0 * self.scan_half_angle / (n - 1)
        return -self.scan_half_angle + np.asarray(sample_index) * step


@dataclass(frozen=True)
class ScanSample:
    """One radiometer sample: scan line, sample slot, and its start time."""
    scan_line_index: int
    sample_index: int
    t: datetime
    boresight_angle: float


@dataclass(frozen=True)
class PixelFootprint:
    """Ground ellipse observed by one radiometer sample.

    center sits on the (altitude-shifted) WGS-84 surface; semi axes are in
    metres and orientation is the azimuth of the major axis at the center.
    The private geometry handle keeps the exact construction so containment
    tests reuse the same frame the footprint was built in.
    """
    center: GroundPoint
    semi_major: float
    semi_minor: float
    orientation: float
    source: tuple[str, ScanSample]
    _geom: "_FootprintGeometry" = None

    def __post_init__(self):
        if not self.semi_major >= self.semi_minor > 0:
            raise ValueError("footprint axes must satisfy major >= minor > 0")


@dataclass(frozen=True)
class _FootprintGeometry:
    """Construction context: satellite state and per-pixel ellipse frame."""
    sat_r: tuple
    sat_v_inertial: tuple
    spec: RadiometerSpec
    ground_altitude: float
    center_ecef: tuple
    u_major: tuple
    u_minor: tuple


def scan_phase(spec: RadiometerSpec, t: datetime, t0: datetime) -> ScanSample:
    """Predict the scan sample active at time t given phase origin t0.

    The scan line index is floor((t - t0)/scan_period); the boresight sweeps
    linearly from -scan_half_angle to +scan_half_angle over the line's
    samples.  Raises NotPhaseLocked for scanners whose phase cannot be
    predicted; callers must then geofence whole scan lines.
    """
    if not spec.phase_locked:
        raise NotPhaseLocked(
            f"radiometer {spec.name} scan phase is not predictable; use "
            "scan-line granularity geofencing")
    # Timestamps quantize to microseconds; snapping half a microsecond keeps
    # times that land exactly on a sample boundary in the later sample.
    dt = (ensure_utc(t) - ensure_utc(t0)).total_seconds() + 5.0e-7
    line = math.floor(dt / spec.scan_period)
    frac = dt - line * spec.scan_period
    idx = min(int(frac / spec.sample_dwell), spec.samples_per_scan - 1)
    start = add_seconds(t0, line * spec.scan_period + idx * spec.sample_dwell)
    return ScanSample(
        scan_line_index=line,
        sample_index=idx,
        t=start,
        boresight_angle=float(spec.boresight_of(idx)),
    )


# --- vectorized footprint core ----------------------------------------------

def _rotate(vec, axis, angle_rad):
    """Rodrigues rotation of vec about unit axis; all shaped (3, n)."""
    c = np.cos(angle_rad)
    s = np.sin(angle_rad)
    k_cross_v = np.cross(axis, vec, axis=0)
    k_dot_v = np.sum(axis * vec, axis=0)
    return vec * c + k_cross_v * s + axis * (k_dot_v * (1.0 - c))


def _ray_ellipsoid(origin, direction, ground_altitude):
    """First intersection of rays with the altitude-shifted WGS-84 surface.

    origin/direction shaped (3, n), metres / unit vectors.  Returns the
    intersection points (3, n) and a boolean miss mask (n,).
    """
    ax = frames.WGS84_A + ground_altitude
    bz = frames.WGS84_B + ground_altitude
    scale = np.array([1.0 / ax, 1.0 / ax, 1.0 / bz]).reshape(3, 1)
    o = origin * scale
    d = direction * scale
    a = np.sum(d * d, axis=0)
    b = 2.0 * np.sum(o * d, axis=0)
    c = np.sum(o * o, axis=0) - 1.0
    disc = b * b - 4.0 * a * c
    miss = disc < 0.0
    sqrt_disc = np.sqrt(np.where(miss, 0.0, disc))
    t_hit = (-b - sqrt_disc) / (2.0 * a)
    miss = miss | (t_hit <= 0.0)
    return origin + t_hit * direction, miss


def _unit(vec):
    return vec / np.linalg.norm(vec, axis=0)


def _footprint_arrays(sat_r, sat_v_inertial, boresight_deg, spec,
                      ground_altitude):
    """Build footprint ellipses for many samples at once.

    sat_r / sat_v_inertial shaped (3, n) metres resp. m/s, boresight_deg
    (n,).  Returns a dict of arrays; 'miss' flags rays that do not hit the
    ellipsoid.
    """
    sat_r = np.atleast_2d(np.asarray(sat_r, dtype=float))
    if sat_r.shape[0] != 3:
        sat_r = sat_r.T
    sat_v = np.atleast_2d(np.asarray(sat_v_inertial, dtype=float))
    if sat_v.shape[0] != 3:
        sat_v = sat_v.T
    theta = np.radians(np.atleast_1d(np.asarray(boresight_deg, dtype=float)))
    half_beam = math.radians(spec.beamwidth_3db / 2.0)

    lat, lon, _ = frames.ecef_to_geodetic(sat_r)
    _, _, up = frames.enu_basis(lat, lon)
    nadir = -up
    # Scan rotation axis: along-track direction made exactly orthogonal to
    # nadir, so a boresight rotation of theta subtends exactly theta.
    v_perp = sat_v - up * np.sum(sat_v * up, axis=0)
    axis = _unit(v_perp)

    d0 = _rotate(nadir, axis, theta)
    center, miss = _ray_ellipsoid(sat_r, d0, ground_altitude)

    d_scan_p = _rotate(nadir, axis, theta + half_beam)
    d_scan_m = _rotate(nadir, axis, theta - half_beam)
    p_plus, m1 = _ray_ellipsoid(sat_r, d_scan_p, ground_altitude)
    p_minus, m2 = _ray_ellipsoid(sat_r, d_scan_m, ground_altitude)

    w = _unit(np.cross(d0, axis, axis=0))
    d_cross_p = _rotate(d0, w, np.full_like(theta, half_beam))
    d_cross_m = _rotate(d0, w, np.full_like(theta, -half_beam))
    q_plus, m3 = _ray_ellipsoid(sat_r, d_cross_p, ground_altitude)
    q_minus, m4 = _ray_ellipsoid(sat_r, d_cross_m, ground_altitude)

    miss = miss | m1 | m2 | m3 | m4

    semi_scan = 0.5 * (np.linalg.norm(p_plus - center, axis=0)
                       + np.linalg.norm(p_minus - center, axis=0))
    semi_cross = 0.5 * (np.linalg.norm(q_plus - center, axis=0)
                        + np.linalg.norm(q_minus - center, axis=0))

    clat, clon, _ = frames.ecef_to_geodetic(center)
    east, north, up_c = frames.enu_basis(clat, clon)

    scan_dir = p_plus - p_minus
    cross_dir = q_plus - q_minus
    take_scan = semi_scan >= semi_cross
    major_dir = np.where(take_scan, scan_dir, cross_dir)
    # Project onto the tangent plane and orthonormalize.
    major_dir = major_dir - up_c * np.sum(major_dir * up_c, axis=0)
    u_major = _unit(major_dir)
    u_minor = np.cross(up_c, u_major, axis=0)

    orientation = np.degrees(np.arctan2(np.sum(u_major * east, axis=0),
                                        np.sum(u_major * north, axis=0)))
    orientation = orientation % 360.0

    return {
        "center": center,
        "center_lat": np.atleast_1d(clat),
        "center_lon": np.atleast_1d(clon),
        "semi_major": np.maximum(semi_scan, semi_cross),
        "semi_minor": np.minimum(semi_scan, semi_cross),
        "u_major": u_major,
        "u_minor": u_minor,
        "orientation": orientation,
        "miss": miss,
    }


def _ellipse_margins(arrays, tx_ecef, buffer_multiplier):
    """Inflated-ellipse containment margin for each footprint.

    Negative or zero means the transmitter is inside the inflated ellipse;
    misses map to +inf.  The margin is the quadratic form value minus one,
    which is the quantity the geofence boundary refinement bisects on.
    """
    delta = np.asarray(tx_ecef, dtype=float).reshape(3, 1) - arrays["center"]
    x = np.sum(delta * arrays["u_major"], axis=0)
    y = np.sum(delta * arrays["u_minor"], axis=0)
    a = arrays["semi_major"] * buffer_multiplier
    b = arrays["semi_minor"] * buffer_multiplier
    margin = (x / a) ** 2 + (y / b) ** 2 - 1.0
    return np.where(arrays["miss"], np.inf, margin)


def pixel_footprint(sat: SatelliteState, sample: ScanSample,
                    spec: RadiometerSpec,
                    ground_altitude: float = 0.0) -> PixelFootprint:
    """Project one scan sample onto the ground.

    Raises NoIntersection when the boresight (or a 3 dB cone edge ray)
    misses the Earth, which indicates a malformed scan configuration.
    """
    arrays = _footprint_arrays(
        sat.r.reshape(3, 1), sat.v_inertial.reshape(3, 1),
        [sample.boresight_angle], spec, ground_altitude)
    if bool(arrays["miss"][0]):
        raise NoIntersection(
            f"boresight {sample.boresight_angle:.2f} deg misses the Earth "
            "ellipsoid")
    geom = _FootprintGeometry(
        sat_r=tuple(map(float, sat.r)),
        sat_v_inertial=tuple(map(float, sat.v_inertial)),
        spec=spec,
        ground_altitude=ground_altitude,
        center_ecef=tuple(float(v) for v in arrays["center"][:, 0]),
        u_major=tuple(float(v) for v in arrays["u_major"][:, 0]),
        u_minor=tuple(float(v) for v in arrays["u_minor"][:, 0]),
    )
    return PixelFootprint(
        center=GroundPoint(float(arrays["center_lat"][0]),
                           float(arrays["center_lon"][0]),
                           ground_altitude),
        semi_major=float(arrays["semi_major"][0]),
        semi_minor=float(arrays["semi_minor"][0]),
        orientation=float(arrays["orientation"][0]),
        source=("", sample),
        _geom=geom,
    )


def _pixel_margin(fp: PixelFootprint, tx: GroundPoint,
                  buffer_multiplier: float) -> float:
    geom = fp._geom
    delta = tx.ecef() - np.array(geom.center_ecef)
    x = float(np.dot(delta, geom.u_major))
    y = float(np.dot(delta, geom.u_minor))
    a = fp.semi_major * buffer_multiplier
    b = fp.semi_minor * buffer_multiplier
    return (x / a) ** 2 + (y / b) ** 2 - 1.0


def subtends(fp: PixelFootprint, tx: GroundPoint,
             policy: BufferPolicy) -> bool:
    """Does this footprint (under the given policy) subtend the transmitter?

    PixelLevel: point-in-ellipse with the axes inflated by the buffer
    multiplier.  ScanLine: the transmitter may sit anywhere inside the
    inflated swath strip of the footprint's scan line, evaluated with the
    satellite geometry the footprint was built from.
    """
    if policy.kind is PolicyKind.PIXEL_LEVEL:
        return _pixel_margin(fp, tx, policy.buffer_multiplier) <= 0.0
    geom = fp._geom
    spec = geom.spec
    n = spec.samples_per_scan
    boresights = spec.boresight_of(np.arange(n))
    r = np.tile(np.array(geom.sat_r).reshape(3, 1), (1, n))
    v = np.tile(np.array(geom.sat_v_inertial).reshape(3, 1), (1, n))
    arrays = _footprint_arrays(r, v, boresights, spec, geom.ground_altitude)
    margins = _ellipse_margins(arrays, tx.ecef(), policy.buffer_multiplier)
    return bool(np.any(margins <= 0.0))


def footprints_batch(r_ecef, v_inertial, samples, spec: RadiometerSpec,
                     ground_altitude: float = 0.0,
                     satellite_id: str = "") -> list[PixelFootprint]:
    """Construct many footprints at once from state arrays.

    r_ecef/v_inertial are (3, n) metre arrays matching the n scan samples.
    Samples whose rays miss the ellipsoid raise NoIntersection, as in the
    scalar path.
    """
    boresights = np.array([s.boresight_angle for s in samples])
    arrays = _footprint_arrays(r_ecef, v_inertial, boresights, spec,
                               ground_altitude)
    if np.any(arrays["miss"]):
        bad = int(np.flatnonzero(arrays["miss"])[0])
        raise NoIntersection(
            f"boresight {boresights[bad]:.2f} deg misses the Earth "
            "ellipsoid")
    out = []
    for i, sample in enumerate(samples):
        geom = _FootprintGeometry(
            sat_r=tuple(float(v) for v in r_ecef[:, i]),
            sat_v_inertial=tuple(float(v) for v in v_inertial[:, i]),
            spec=spec,
            ground_altitude=ground_altitude,
            center_ecef=tuple(float(v) for v in arrays["center"][:, i]),
            u_major=tuple(float(v) for v in arrays["u_major"][:, i]),
            u_minor=tuple(float(v) for v in arrays["u_minor"][:, i]),
        )
        out.append(PixelFootprint(
            center=GroundPoint(float(arrays["center_lat"][i]),
                               float(arrays["center_lon"][i]),
                               ground_altitude),
            semi_major=float(arrays["semi_major"][i]),
            semi_minor=float(arrays["semi_minor"][i]),
            orientation=float(arrays["orientation"][i]),
            source=(satellite_id, sample),
            _geom=geom,
        ))
    return out


# --- presets -----------------------------------------------------------------

_SPEC_FIELDS = {
    "name", "itu_sensor_id", "center_frequency", "bandwidth",
    "antenna_max_gain", "beamwidth_3db", "scan_period", "scan_half_angle",
    "samples_per_scan", "n_temp", "phase_locked",
}


def spec_from_dict(data: dict) -> RadiometerSpec:
    """Build a RadiometerSpec from preset JSON; unknown fields are rejected."""
    unknown = set(data) - _SPEC_FIELDS
    if unknown:
        raise ConfigError(
            f"unknown radiometer preset fields: {sorted(unknown)}")
    missing = _SPEC_FIELDS - set(data)
    if missing:
        raise ConfigError(
            f"radiometer preset missing fields: {sorted(missing)}")
    try:
        return RadiometerSpec(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid radiometer preset: {exc}") from exc


def load_preset(name_or_path: str) -> RadiometerSpec:
    """Load a radiometer preset by bundled name ('atms') or JSON file path."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
        return spec_from_dict(data)
    resource = importlib.resources.files("darkspace.presets")
    candidate = resource / f"{name_or_path.lower()}.json"
    try:
        text = candidate.read_text()
    except FileNotFoundError:
        raise ConfigError(
            f"no radiometer preset named {name_or_path!r} and no such file")
    return spec_from_dict(json.loads(text))
