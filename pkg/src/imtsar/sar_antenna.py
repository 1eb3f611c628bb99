"""Victim SAR receive antenna: gain toward arbitrary ground directions,
receiver noise floor, and the boresight-relative view geometry.

Gain comes from an ingested average-gain table (the published whole-sphere
table of ITU-R RS.2043 is not redistributable here) or from a parametric
fallback with matching peak and beamwidths.  Results obtained with the
fallback are labeled as such by the callers and carry wider tolerances.

Angle convention: the vertical plane contains the boresight and the nadir
(the elevation cut of the pointing), the horizontal plane is orthogonal to
it; both off-axis angles are tangent-plane components of the direction to
the source, so small angles coincide with the principal-cut angles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from imtsar.geometry import (
    R_EARTH_KM,
    BeamPointing,
    GeodeticPosition,
    SatelliteState,
    boresight_direction,
    ecef_from_geodetic,
    footprint_center,
    geodetic_from_ecef,
    great_circle_arc_deg,
)

BOLTZMANN_J_K = 1.38e-23
REF_TEMPERATURE_K = 290.0

PARAMETRIC_FLOOR_DBI = -10.0
# scales the sinc argument so the half-beamwidth point sits at -3 dB
SINC_3DB_SCALE = 0.8859


@dataclass(frozen=True)
class SarSensor:
    peak_gain_dbi: float = 47.0
    elev_bw_deg: float = 1.13
    az_bw_deg: float = 0.53
    noise_figure_db: float = 3.0
    rf_bandwidth_mhz: float = 1200.0
    center_freq_mhz: float = 9800.0
    tig_db: float = 0.25
    efficiency: float = 0.70

    def __post_init__(self):
        for name in ("peak_gain_dbi", "elev_bw_deg", "az_bw_deg",
                     "noise_figure_db", "rf_bandwidth_mhz", "center_freq_mhz",
                     "tig_db"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in (0, 1]")

    @property
    def zone_correction_db(self) -> float:
        """Aperture-efficiency and integrated-gain correction, about -1.80 dB.

        Applied outside the main beam only (zones 2 and 3); the main-beam
        zone uses the pattern value as-is.
        """
        return 10.0 * math.log10(self.efficiency) - self.tig_db


DEFAULT_SENSOR = SarSensor()


class SarGainTable:
    """Whole-sphere average-gain grid with bilinear lookup.

    Grid axes are the vertical and horizontal off-axis angles in degrees;
    queries outside the tabulated range clamp to the nearest edge.
    """

    def __init__(self, v_deg: np.ndarray, h_deg: np.ndarray,
                 gain_dbi: np.ndarray):
        v = np.asarray(v_deg, dtype=float)
        h = np.asarray(h_deg, dtype=float)
        g = np.asarray(gain_dbi, dtype=float)
        if v.ndim != 1 or h.ndim != 1 or g.shape != (v.size, h.size):
            raise ValueError("gain grid shape does not match its axes")
        if np.any(np.diff(v) <= 0.0) or np.any(np.diff(h) <= 0.0):
            raise ValueError("table axes must be strictly increasing")
        if not np.all(np.isfinite(g)):
            raise ValueError("gain table contains non-finite entries")
        peak = float(g.max())
        if abs(peak - 47.0) > 0.5:
            raise ValueError(f"table peak {peak:.2f} dBi departs from 47 dBi")
        self.v_deg = v
        self.h_deg = h
        self.gain_dbi = g

    @classmethod
    def from_csv(cls, path) -> "SarGainTable":
        """Load `v_deg,h_deg,gain_dbi` rows forming a complete grid."""
        cells: dict[tuple[float, float], float] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"v_deg", "h_deg", "gain_dbi"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise ValueError(f"{path}: header must contain {sorted(required)}")
            for i, row in enumerate(reader, start=2):
                try:
                    key = (float(row["v_deg"]), float(row["h_deg"]))
                    cells[key] = float(row["gain_dbi"])
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{path}:{i}: bad numeric value") from exc
        if not cells:
            raise ValueError(f"{path}: no data rows")
        v = np.array(sorted({k[0] for k in cells}))
        h = np.array(sorted({k[1] for k in cells}))
        if len(cells) != v.size * h.size:
            raise ValueError(f"{path}: grid is not complete "
                             f"({len(cells)} cells for {v.size}x{h.size})")
        g = np.empty((v.size, h.size))
        for (vi, hi), val in cells.items():
            g[np.searchsorted(v, vi), np.searchsorted(h, hi)] = val
        return cls(v, h, g)

    def gain(self, v_deg, h_deg):
        """Bilinear interpolation with edge clamping; vectorized."""
        v = np.clip(np.asarray(v_deg, dtype=float), self.v_deg[0], self.v_deg[-1])
        h = np.clip(np.asarray(h_deg, dtype=float), self.h_deg[0], self.h_deg[-1])
        vi = np.clip(np.searchsorted(self.v_deg, v) - 1, 0, self.v_deg.size - 2)
        hi = np.clip(np.searchsorted(self.h_deg, h) - 1, 0, self.h_deg.size - 2)
        dv = self.v_deg[vi + 1] - self.v_deg[vi]
        dh = self.h_deg[hi + 1] - self.h_deg[hi]
        fv = (v - self.v_deg[vi]) / dv
        fh = (h - self.h_deg[hi]) / dh
        g = ((1 - fv) * (1 - fh) * self.gain_dbi[vi, hi]
             + fv * (1 - fh) * self.gain_dbi[vi + 1, hi]
             + (1 - fv) * fh * self.gain_dbi[vi, hi + 1]
             + fv * fh * self.gain_dbi[vi + 1, hi + 1])
        if g.ndim == 0:
            return float(g)
        return g


def parametric_gain(v_deg, h_deg, sensor: SarSensor = DEFAULT_SENSOR):
    """Fallback pattern: separable sinc^2 cuts, -10 dBi floor."""
    v = np.asarray(v_deg, dtype=float)
    h = np.asarray(h_deg, dtype=float)
    cut_v = np.abs(np.sinc(SINC_3DB_SCALE * v / sensor.elev_bw_deg))
    cut_h = np.abs(np.sinc(SINC_3DB_SCALE * h / sensor.az_bw_deg))
    g = (sensor.peak_gain_dbi
         + 20.0 * np.log10(np.maximum(cut_v, 1e-30))
         + 20.0 * np.log10(np.maximum(cut_h, 1e-30)))
    out = np.maximum(g, PARAMETRIC_FLOOR_DBI)
    if out.ndim == 0:
        return float(out)
    return out


def sar_gain(h_deg, v_deg, zone=1, table: SarGainTable | None = None,
             sensor: SarSensor = DEFAULT_SENSOR,
             allow_parametric: bool = True):
    """Receive gain toward an off-axis direction, dBi; vectorized.

    Outside the main beam (zone 2 or 3) the aperture-efficiency/TIG
    correction is added; the step at the zone boundary is intentional.
    """
    if table is not None:
        g = table.gain(v_deg, h_deg)
    elif allow_parametric:
        g = parametric_gain(v_deg, h_deg, sensor)
    else:
        raise ValueError("no gain table loaded and the parametric fallback "
                         "is disabled")
    corr = np.where(np.asarray(zone) == 1, 0.0, sensor.zone_correction_db)
    out = g + corr
    if np.ndim(out) == 0:
        return float(out)
    return out


def sar_noise_power(bandwidth_mhz: float, nf_db: float) -> float:
    """Receiver noise floor, dBW: kTB plus the noise figure."""
    if bandwidth_mhz <= 0.0:
        raise ValueError("bandwidth must be positive")
    return (10.0 * math.log10(BOLTZMANN_J_K * REF_TEMPERATURE_K
                              * bandwidth_mhz * 1e6) + nf_db)


class SarViewGeometry:
    """Boresight-relative frame for one satellite pointing.

    Precomputes the boresight basis and the footprint center so that
    per-station off-axis angles and zone labels reduce to dot products.
    ``zone2_outer_radius_km`` is the ground radius separating the middle
    and outer deployment rings, used only to split zones 2 and 3 (the
    gain correction is identical in both).
    """

    def __init__(self, sat: SatelliteState, pointing: BeamPointing,
                 sensor: SarSensor = DEFAULT_SENSOR,
                 zone2_outer_radius_km: float = math.sqrt(1000.0 / math.pi)):
        self.sat = sat
        self.pointing = pointing
        self.sensor = sensor
        self.zone2_outer_radius_km = zone2_outer_radius_km
        self.boresight = boresight_direction(sat, pointing)
        self.center = footprint_center(sat, pointing)
        self._center_unit = ecef_from_geodetic(self.center)
        self._center_unit = self._center_unit / np.linalg.norm(self._center_unit)
        nadir = -sat.position_km / np.linalg.norm(sat.position_km)
        v_axis = nadir - float(np.dot(nadir, self.boresight)) * self.boresight
        nv = np.linalg.norm(v_axis)
        if nv < 1e-12:
            # nadir pointing: elevation cut aligned with local north
            ref = np.array([0.0, 0.0, 1.0])
            v_axis = ref - float(np.dot(ref, self.boresight)) * self.boresight
            nv = np.linalg.norm(v_axis)
        self.v_axis = v_axis / nv
        self.h_axis = np.cross(self.boresight, self.v_axis)

    def off_axis_arrays(self, bs_ecef: np.ndarray
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(h_deg, v_deg, zone) for an (N, 3) block of station positions."""
        d = bs_ecef - self.sat.position_km
        d = d / np.linalg.norm(d, axis=1, keepdims=True)
        along = d @ self.boresight
        v = np.degrees(np.arctan2(d @ self.v_axis, along))
        h = np.degrees(np.arctan2(d @ self.h_axis, along))
        in_beam = ((v / (self.sensor.elev_bw_deg / 2.0)) ** 2
                   + (h / (self.sensor.az_bw_deg / 2.0)) ** 2) <= 1.0
        u = bs_ecef / np.linalg.norm(bs_ecef, axis=1, keepdims=True)
        arc = np.arccos(np.clip(u @ self._center_unit, -1.0, 1.0))
        ground_km = R_EARTH_KM * arc
        zone = np.where(in_beam, 1,
                        np.where(ground_km <= self.zone2_outer_radius_km, 2, 3))
        return h, v, zone

    def off_axis_of_bs(self, bs: GeodeticPosition
                       ) -> tuple[float, float, int]:
        """(h_deg, v_deg, zone) for a single ground station."""
        h, v, zone = self.off_axis_arrays(ecef_from_geodetic(bs)[None, :])
        return float(h[0]), float(v[0]), int(zone[0])

    def footprint_major_axis_km(self) -> float:
        """Ground length of the 3 dB elevation cut (the footprint major axis)."""
        half = math.radians(self.sensor.elev_bw_deg / 2.0)
        r = self.sat.position_km
        ends = []
        for sign in (-1.0, 1.0):
            d = (math.cos(half) * self.boresight
                 + math.sin(half) * sign * self.v_axis)
            rd = float(np.dot(r, d))
            disc = rd * rd - (float(np.dot(r, r)) - R_EARTH_KM ** 2)
            if disc < 0.0:
                raise ValueError("3 dB contour does not reach the ground")
            ends.append(geodetic_from_ecef(r + (-rd - math.sqrt(disc)) * d))
        return math.radians(great_circle_arc_deg(*ends)) * R_EARTH_KM
