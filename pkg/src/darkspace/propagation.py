"""Aggregate interference at the radiometer under LOS-only and two-ray models.

The LOS-only path is the baseline regulatory accounting model: every
transmitter that subtends a measurement pixel contributes its EIRP density
attenuated by free-space loss, atmosphere, polarization mismatch, and the
radiometer antenna gain.  The two-ray model adds a single ground-reflected
ray with complex reflection coefficient, which modulates each contribution
by the coherent two-path gain.  Deployments are generated by a seeded Monte
Carlo so every report is exactly reproducible.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, ElevationNonPositive, EmptyArea, NoSamples
from .linkbudget import SPEED_OF_LIGHT, fspl_db
from .orbit import GroundPoint, SatelliteState, frames
from .radiometer import PixelFootprint, RadiometerSpec

#: Mean Earth radius used for bounding-box areas, km.
EARTH_RADIUS_AREA_KM = 6371.0088


class TransmitterKind(Enum):
    GNB = "gNB"
    UE = "UE"
    IAB = "IAB"
    FWA_CLASS_V = "FWA_ClassV"
    FLASHLIGHT = "Flashlight"


class PathModel(Enum):
    LOS_ONLY = "los"
    TWO_RAY = "two-ray"


@dataclass(frozen=True)
class TransmitterSpec:
    """One emitter in a deployment.

    eirp_density is the emission density toward the computation direction in
    dBm/MHz (in-band or out-of-band, whichever the study negotiates); the
    transmit antenna pattern is folded into it.
    """
    id: str
    location: GroundPoint
    antenna_height: float
    eirp_density: float
    center_frequency: float
    emission_bandwidth: float
    pointing: tuple[float, float] = (0.0, 0.0)
    kind: TransmitterKind = TransmitterKind.GNB

    def __post_init__(self):
        if self.emission_bandwidth <= 0:
            raise ValueError("emission_bandwidth must be > 0")
        if self.antenna_height < 0:
            raise ValueError("antenna_height must be >= 0")


@dataclass(frozen=True)
class InterferenceSample:
    """Aggregate interference seen in one pixel, with its contributors."""
    pixel: PixelFootprint
    aggregate: float
    contributors: tuple


@dataclass(frozen=True)
class ComplianceReport:
    """Quantile compliance of aggregate interference against a threshold.

    The rule is strict: a pixel complies only when its aggregate is strictly
    below the threshold; the report passes when the compliant fraction
    reaches the quantile.
    """
    area_km2: float
    n_pixels: int
    threshold: float
    quantile: float
    fraction_compliant: float
    passed: bool


def two_ray_gain_db(antenna_height, elevation_deg, frequency_hz: float,
                    reflection_coeff: complex,
                    floor_db: float = -60.0):
    """Coherent gain of LOS plus one ground reflection, relative to LOS.

    Path difference is 2*h*sin(elevation); deep interference nulls are
    clamped at floor_db.  Elementwise over antenna height and elevation.
    """
    el = np.asarray(elevation_deg, dtype=float)
    h = np.asarray(antenna_height, dtype=float)
    if np.any(el <= 0):
        raise ElevationNonPositive("two-ray geometry needs elevation > 0")
    if abs(reflection_coeff) > 1.0:
        raise ConfigError("reflection coefficient magnitude must be <= 1")
    delta = 2.0 * h * np.sin(np.radians(el))
    k = 2.0 * math.pi * frequency_hz / SPEED_OF_LIGHT
    amplitude = np.abs(1.0 + reflection_coeff * np.exp(1j * k * delta))
    with np.errstate(divide="ignore"):
        gain = 20.0 * np.log10(amplitude)
    return np.maximum(gain, floor_db)[()]


# --- deployment generation ----------------------------------------------------


@dataclass(frozen=True)
class GeoBox:
    """Geodetic bounding box (degrees)."""
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if not (self.lat_max > self.lat_min and self.lon_max > self.lon_min):
            raise EmptyArea("bounding box is degenerate")

    @property
    def area_km2(self) -> float:
        lat1, lat2 = math.radians(self.lat_min), math.radians(self.lat_max)
        dlon = math.radians(self.lon_max - self.lon_min)
        return (EARTH_RADIUS_AREA_KM ** 2 * dlon
                * (math.sin(lat2) - math.sin(lat1)))


@dataclass(frozen=True)
class EmitterClass:
    """Density and emission statistics for one transmitter kind."""
    kind: TransmitterKind
    density_per_km2: float
    eirp_mean_dbm_mhz: float
    eirp_std_db: float = 0.0
    antenna_height_m: float = 10.0


#: Baseline emitter mixes; all values are scenario configuration, not
#: physical claims, and are meant to be overridden per study.
SCENARIOS = {
    "urban": (
        EmitterClass(TransmitterKind.GNB, 10.0, -25.0, 3.0, 15.0),
        EmitterClass(TransmitterKind.UE, 100.0, -35.0, 4.0, 1.5),
        EmitterClass(TransmitterKind.IAB, 1.0, -22.0, 3.0, 20.0),
    ),
    "suburban": (
        EmitterClass(TransmitterKind.GNB, 1.0, -25.0, 3.0, 20.0),
        EmitterClass(TransmitterKind.UE, 10.0, -35.0, 4.0, 1.5),
        EmitterClass(TransmitterKind.FWA_CLASS_V, 0.5, -18.0, 3.0, 8.0),
    ),
    "rural": (
        EmitterClass(TransmitterKind.GNB, 0.1, -25.0, 3.0, 30.0),
        EmitterClass(TransmitterKind.UE, 1.0, -35.0, 4.0, 1.5),
        EmitterClass(TransmitterKind.FWA_CLASS_V, 0.2, -18.0, 3.0, 8.0),
    ),
}


def generate_deployment(scenario, area: GeoBox, seed: int,
                        center_frequency: float = 24.0e9,
                        emission_bandwidth: float = 200.0e6,
                        classes=None) -> list[TransmitterSpec]:
    """Seeded Monte Carlo deployment inside a bounding box.

    scenario names one of SCENARIOS unless explicit emitter classes are
    given.  Placement is uniform per unit area (longitude uniform, sine of
    latitude uniform); the emitter count is floor(density*area + u) with u
    the first uniform draw of each class's stream, so expectations match the
    configured density exactly while staying integer and deterministic.
    """
    if classes is None:
        try:
            classes = SCENARIOS[scenario]
        except KeyError:
            raise ConfigError(
                f"unknown scenario {scenario!r}; expected one of "
                f"{sorted(SCENARIOS)}") from None
    area_km2 = area.area_km2
    if area_km2 <= 0:
        raise EmptyArea("bounding box has zero area")

    rng = np.random.default_rng(seed)
    sin_lo = math.sin(math.radians(area.lat_min))
    sin_hi = math.sin(math.radians(area.lat_max))

    out = []
    for cls in classes:
        count = int(math.floor(cls.density_per_km2 * area_km2
                               + rng.uniform()))
        lats = np.degrees(np.arcsin(rng.uniform(sin_lo, sin_hi, count)))
        lons = rng.uniform(area.lon_min, area.lon_max, count)
        if cls.eirp_std_db > 0:
            eirps = rng.normal(cls.eirp_mean_dbm_mhz, cls.eirp_std_db, count)
        else:
            eirps = np.full(count, cls.eirp_mean_dbm_mhz)
        for i in range(count):
            out.append(TransmitterSpec(
                id=f"{scenario}-{cls.kind.value}-{i:06d}",
                location=GroundPoint(float(lats[i]), float(lons[i]), 0.0),
                antenna_height=cls.antenna_height_m,
                eirp_density=float(eirps[i]),
                center_frequency=center_frequency,
                emission_bandwidth=emission_bandwidth,
                kind=cls.kind,
            ))
    return out


# --- aggregation ---------------------------------------------------------------


class DeploymentArrays:
    """Deployment fields unpacked into arrays for fast per-pixel evaluation.

    Build once and reuse across pixels; the geometry per transmitter never
    changes between pixels.
    """

    def __init__(self, deployment):
        self.transmitters = tuple(deployment)
        n = len(self.transmitters)
        self.ids = [tx.id for tx in self.transmitters]
        self.lat = np.array([tx.location.latitude for tx in deployment])
        self.lon = np.array([tx.location.longitude for tx in deployment])
        self.ground_ecef = (
            frames.geodetic_to_ecef(
                self.lat, self.lon,
                np.array([tx.location.altitude for tx in deployment]))
            if n else np.zeros((3, 0)))
        self.antenna_ecef = (
            frames.geodetic_to_ecef(
                self.lat, self.lon,
                np.array([tx.location.altitude + tx.antenna_height
                          for tx in deployment]))
            if n else np.zeros((3, 0)))
        self.antenna_height = np.array([tx.antenna_height
                                        for tx in deployment])
        self.eirp = np.array([tx.eirp_density for tx in deployment])

    def __len__(self):
        return len(self.transmitters)


def aggregate_interference(pixel: PixelFootprint, sat: SatelliteState,
                           deployment, model: PathModel,
                           radiometer: RadiometerSpec,
                           atmosphere=None,
                           polarization_db: float = -3.0,
                           reflection_coeff: complex = -0.7,
                           two_ray_floor_db: float = -60.0,
                           include_contributors: bool = True
                           ) -> InterferenceSample:
    """Aggregate dBm/MHz at the radiometer from transmitters in one pixel.

    Only transmitters inside the raw (unbuffered) pixel ellipse count;
    buffering is a protection concept, not an accounting one.  Each
    contribution is EIRP density plus the loss chain at that transmitter's
    own slant geometry; the aggregate is their linear power sum.  Pass a
    prebuilt DeploymentArrays when sweeping many pixels; disable
    include_contributors to drop the per-transmitter audit tuples on large
    grids (the aggregate is unchanged).
    """
    arrays = (deployment if isinstance(deployment, DeploymentArrays)
              else DeploymentArrays(deployment))
    geom = pixel._geom
    if len(arrays) == 0:
        return InterferenceSample(pixel=pixel, aggregate=float("-inf"),
                                  contributors=())

    center = np.array(geom.center_ecef).reshape(3, 1)
    delta = arrays.ground_ecef - center
    x = np.array(geom.u_major) @ delta
    y = np.array(geom.u_minor) @ delta
    inside = (x / pixel.semi_major) ** 2 + (y / pixel.semi_minor) ** 2 <= 1.0
    if not np.any(inside):
        return InterferenceSample(pixel=pixel, aggregate=float("-inf"),
                                  contributors=())

    idx = np.flatnonzero(inside)
    elevation, _, slant = frames.look_angles_from_ecef(
        sat.r.reshape(3, 1), arrays.antenna_ecef[:, idx],
        arrays.lat[idx], arrays.lon[idx])
    elevation = np.atleast_1d(elevation)
    slant = np.atleast_1d(slant)
    visible = elevation > 0.0
    idx = idx[visible]
    if idx.size == 0:
        return InterferenceSample(pixel=pixel, aggregate=float("-inf"),
                                  contributors=())
    elevation = elevation[visible]
    slant = slant[visible]

    loss = np.asarray(fspl_db(slant, radiometer.center_frequency),
                      dtype=float)
    if atmosphere is not None:
        loss = loss + atmosphere.loss_db(elevation)
    loss = loss + polarization_db + radiometer.antenna_max_gain
    path = "LOS"
    if model is PathModel.TWO_RAY:
        loss = loss + two_ray_gain_db(
            arrays.antenna_height[idx], elevation,
            radiometer.center_frequency, reflection_coeff, two_ray_floor_db)
        path = "TwoRay"

    contributions = arrays.eirp[idx] + loss
    linear_sum = float(np.sum(10.0 ** (contributions / 10.0)))
    aggregate = (10.0 * math.log10(linear_sum) if linear_sum > 0.0
                 else float("-inf"))
    contributors = ()
    if include_contributors:
        contributors = tuple(
            (arrays.ids[i], float(c), path)
            for i, c in zip(idx, contributions))
    return InterferenceSample(pixel=pixel, aggregate=aggregate,
                              contributors=contributors)


def compliance(samples, threshold: float = -200.0, quantile: float = 0.9999,
               area_km2: float = 2.0e6) -> ComplianceReport:
    """Fraction of pixels whose aggregate is strictly below the threshold."""
    if not samples:
        raise NoSamples("compliance needs at least one interference sample")
    n = len(samples)
    compliant = sum(1 for s in samples if s.aggregate < threshold)
    fraction = compliant / n
    return ComplianceReport(
        area_km2=area_km2,
        n_pixels=n,
        threshold=threshold,
        quantile=quantile,
        fraction_compliant=fraction,
        passed=fraction >= quantile,
    )


# --- serialization -------------------------------------------------------------


def transmitter_to_dict(tx: TransmitterSpec) -> dict:
    return {
        "id": tx.id,
        "lat": tx.location.latitude,
        "lon": tx.location.longitude,
        "alt_m": tx.location.altitude,
        "antenna_height_m": tx.antenna_height,
        "eirp_density_dbm_mhz": tx.eirp_density,
        "center_frequency_hz": tx.center_frequency,
        "emission_bandwidth_hz": tx.emission_bandwidth,
        "pointing_az_deg": tx.pointing[0],
        "pointing_el_deg": tx.pointing[1],
        "kind": tx.kind.value,
    }


def transmitter_from_dict(data: dict) -> TransmitterSpec:
    try:
        return TransmitterSpec(
            id=str(data["id"]),
            location=GroundPoint(float(data["lat"]), float(data["lon"]),
                                 float(data.get("alt_m", 0.0))),
            antenna_height=float(data.get("antenna_height_m", 0.0)),
            eirp_density=float(data["eirp_density_dbm_mhz"]),
            center_frequency=float(data["center_frequency_hz"]),
            emission_bandwidth=float(data["emission_bandwidth_hz"]),
            pointing=(float(data.get("pointing_az_deg", 0.0)),
                      float(data.get("pointing_el_deg", 0.0))),
            kind=TransmitterKind(data.get("kind", "gNB")),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad transmitter record: {exc}") from exc


def write_deployment_jsonl(deployment, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tx in deployment:
            fh.write(json.dumps(transmitter_to_dict(tx), sort_keys=True)
                     + "\n")


def read_deployment_jsonl(path) -> list[TransmitterSpec]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(transmitter_from_dict(json.loads(line)))
    return out


GRID_CSV_HEADER = "pixel_lat,pixel_lon,aggregate_dbm_mhz,model,n_contributors"


def write_interference_grid_csv(samples, model: PathModel, path,
                                provenance=()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        fh.write(GRID_CSV_HEADER + "\n")
        for s in samples:
            agg = ("-inf" if s.aggregate == float("-inf")
                   else f"{s.aggregate:.6f}")
            fh.write(f"{s.pixel.center.latitude:.6f},"
                     f"{s.pixel.center.longitude:.6f},"
                     f"{agg},{model.value},{len(s.contributors)}\n")
