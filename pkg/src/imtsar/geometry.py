"""Earth model, coordinate frames, orbit propagation and look geometry.

Conventions used throughout:

- Spherical Earth of radius `R_EARTH_KM` (the WGS-84 equatorial value; the
  source study uses a spherical model without quoting a radius).
- ECEF axes: x through (lat 0, lon 0), z through the north pole.
- ENU look angles: elevation measured from the local horizontal plane,
  azimuth clockwise from north.
- Panel local frame (LCS): ``theta`` is the zenith angle measured from the
  panel vertical, ``phi`` the azimuth from the boresight normal, so an
  untilted boresight sits at (theta=90, phi=0).  Positive mechanical
  downtilt rotates the boresight below the horizon (clockwise convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

R_EARTH_KM = 6378.137        # spherical Earth radius, km
MU_EARTH_KM3_S2 = 398600.4418  # gravitational parameter, km^3/s^2
OMEGA_EARTH_RAD_S = 7.2921150e-5  # Earth rotation rate, rad/s

_KEPLER_TOL_RAD = 1e-12
_KEPLER_MAX_ITER = 50


@dataclass(frozen=True)
class GeodeticPosition:
    """Longitude/latitude in degrees, altitude in km above the sphere."""

    longitude_deg: float
    latitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self):
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude {self.longitude_deg} outside [-180, 180]")
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude {self.latitude_deg} outside [-90, 90]")


@dataclass(frozen=True)
class KeplerianElements:
    """Orbit definition; angles in degrees unless stated otherwise.

    The published element set labels the argument of periapsis in radians
    while every other angle is in degrees; 180.9383 rad is legal but
    implausible, so degrees is the default reading.  Pass
    ``arg_periapsis_is_radians=True`` to use the literal-radians reading.
    """

    periapsis_altitude_km: float
    eccentricity: float
    inclination_deg: float
    raan_deg: float
    arg_periapsis: float
    true_anomaly_deg: float
    arg_periapsis_is_radians: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity {self.eccentricity} not in [0, 1)")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError(f"inclination {self.inclination_deg} not in [0, 180]")

    @property
    def arg_periapsis_deg(self) -> float:
        if self.arg_periapsis_is_radians:
            return math.degrees(self.arg_periapsis)
        return self.arg_periapsis

    @property
    def semi_major_axis_km(self) -> float:
        return (R_EARTH_KM + self.periapsis_altitude_km) / (1.0 - self.eccentricity)

    @property
    def apoapsis_altitude_km(self) -> float:
        return self.semi_major_axis_km * (1.0 + self.eccentricity) - R_EARTH_KM


@dataclass(frozen=True)
class SatelliteState:
    """ECEF position/velocity (km, km/s) plus the geodetic sub-point."""

    position_km: np.ndarray
    velocity_km_s: np.ndarray | None
    geodetic: GeodeticPosition

    @property
    def altitude_km(self) -> float:
        return float(np.linalg.norm(self.position_km)) - R_EARTH_KM


@dataclass(frozen=True)
class BeamPointing:
    """Off-nadir look angle and beam azimuth in the satellite track frame.

    Azimuth 90 deg points to the right of the velocity vector (east for an
    ascending pass), the spotlight geometry used throughout the study.
    """

    bla_deg: float
    azimuth_deg: float = 90.0

    def __post_init__(self):
        if not 0.0 <= self.bla_deg < 90.0:
            raise ValueError(f"look angle {self.bla_deg} not in [0, 90)")


@dataclass(frozen=True)
class PanelOrientation:
    bearing_deg: float
    mech_downtilt_deg: float = 10.0

    def __post_init__(self):
        if not -180.0 <= self.bearing_deg <= 180.0:
            raise ValueError(f"bearing {self.bearing_deg} outside [-180, 180]")


@dataclass(frozen=True)
class LocalDirection:
    theta_deg: float  # zenith angle in panel frame, [0, 180]
    phi_deg: float    # azimuth from boresight, (-180, 180]


def ecef_from_geodetic(pos: GeodeticPosition) -> np.ndarray:
    """ECEF position vector (km) on the spherical Earth."""
    lon = math.radians(pos.longitude_deg)
    lat = math.radians(pos.latitude_deg)
    r = R_EARTH_KM + pos.altitude_km
    return np.array([
        r * math.cos(lat) * math.cos(lon),
        r * math.cos(lat) * math.sin(lon),
        r * math.sin(lat),
    ])


def ecef_arrays(lon_deg, lat_deg, alt_km=0.0) -> np.ndarray:
    """(N, 3) ECEF positions for arrays of geodetic coordinates."""
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    r = R_EARTH_KM + np.asarray(alt_km, dtype=float)
    return np.stack([r * np.cos(lat) * np.cos(lon),
                     r * np.cos(lat) * np.sin(lon),
                     r * np.sin(lat)], axis=-1)


def look_arrays(bs_ecef: np.ndarray, target_ecef: np.ndarray
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(range_km, elevation_deg, azimuth_deg) of one target from (N, 3) sites."""
    d = target_ecef - bs_ecef
    dist = np.linalg.norm(d, axis=-1)
    up = bs_ecef / np.linalg.norm(bs_ecef, axis=-1, keepdims=True)
    z = np.array([0.0, 0.0, 1.0])
    east = np.cross(np.broadcast_to(z, up.shape), up)
    east /= np.linalg.norm(east, axis=-1, keepdims=True)
    north = np.cross(up, east)
    elev = np.degrees(np.arcsin(np.clip(
        np.einsum("...i,...i->...", d, up) / dist, -1.0, 1.0)))
    az = np.degrees(np.arctan2(np.einsum("...i,...i->...", d, east),
                               np.einsum("...i,...i->...", d, north)))
    return dist, elev, az


def geodetic_from_ecef(r: np.ndarray) -> GeodeticPosition:
    rn = float(np.linalg.norm(r))
    if rn == 0.0:
        raise ValueError("zero position vector")
    lat = math.degrees(math.asin(r[2] / rn))
    lon = math.degrees(math.atan2(r[1], r[0]))
    return GeodeticPosition(lon, lat, rn - R_EARTH_KM)


def _solve_kepler(mean_anomaly_rad: float, e: float) -> float:
    """Eccentric anomaly from Kepler's equation, Newton iteration."""
    m = math.remainder(mean_anomaly_rad, 2.0 * math.pi)
    ecc = m if e < 0.8 else math.pi
    for _ in range(_KEPLER_MAX_ITER):
        delta = (ecc - e * math.sin(ecc) - m) / (1.0 - e * math.cos(ecc))
        ecc -= delta
        if abs(delta) < _KEPLER_TOL_RAD:
            return ecc
    raise ArithmeticError("Kepler iteration did not converge")


def _rot_z(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def propagate_orbit(elements: KeplerianElements, t_seconds: float,
                    gmst0_rad: float = 0.0) -> SatelliteState:
    """Two-body state at ``t_seconds`` past the element epoch.

    Parameters
    ----------
    elements : KeplerianElements
        Epoch osculating elements; the epoch anomaly is
        ``elements.true_anomaly_deg``.
    t_seconds : float
        Elapsed time since epoch, seconds.  1 s sampling resolves the
        full orbit (period is on the order of 5 600 s).
    gmst0_rad : float
        Greenwich sidereal angle at epoch; the published set does not give
        an epoch, so 0 is the documented default.

    Returns
    -------
    SatelliteState
        ECEF position and velocity; Earth rotation is applied to both.
    """
    a = elements.semi_major_axis_km
    e = elements.eccentricity
    nu0 = math.radians(elements.true_anomaly_deg)
    ecc0 = 2.0 * math.atan2(math.sqrt(1.0 - e) * math.sin(nu0 / 2.0),
                            math.sqrt(1.0 + e) * math.cos(nu0 / 2.0))
    m0 = ecc0 - e * math.sin(ecc0)
    n = math.sqrt(MU_EARTH_KM3_S2 / a ** 3)
    ecc = _solve_kepler(m0 + n * t_seconds, e)

    r_mag = a * (1.0 - e * math.cos(ecc))
    cos_nu = (math.cos(ecc) - e) / (1.0 - e * math.cos(ecc))
    sin_nu = math.sqrt(1.0 - e * e) * math.sin(ecc) / (1.0 - e * math.cos(ecc))
    r_pf = np.array([r_mag * cos_nu, r_mag * sin_nu, 0.0])
    v_scale = math.sqrt(MU_EARTH_KM3_S2 * a) / r_mag
    v_pf = np.array([-v_scale * math.sin(ecc),
                     v_scale * math.sqrt(1.0 - e * e) * math.cos(ecc), 0.0])

    to_eci = (_rot_z(math.radians(elements.raan_deg))
              @ _rot_x(math.radians(elements.inclination_deg))
              @ _rot_z(math.radians(elements.arg_periapsis_deg)))
    r_eci = to_eci @ r_pf
    v_eci = to_eci @ v_pf

    theta_g = gmst0_rad + OMEGA_EARTH_RAD_S * t_seconds
    to_ecef = _rot_z(-theta_g)
    r_ecef = to_ecef @ r_eci
    omega = np.array([0.0, 0.0, OMEGA_EARTH_RAD_S])
    v_ecef = to_ecef @ v_eci - np.cross(omega, r_ecef)
    return SatelliteState(r_ecef, v_ecef, geodetic_from_ecef(r_ecef))


def elevation_from_bla(bla_deg: float, sat_altitude_km: float) -> float:
    """Boresight elevation at the footprint center for a given look angle.

    Law of sines in the Earth-center / satellite / ground-point triangle:
    ``cos(alpha) = ((R+h)/R) * sin(beta)``.

    The Earth is spherical here.  Repeating the exercise on the WGS-84
    ellipsoid moves the low-elevation answer (18 deg look angle) by about
    0.002 deg, far below every tolerance in play, so the spherical model
    is kept.

    Raises
    ------
    ValueError
        If the look angle reaches past the Earth limb.
    """
    if sat_altitude_km <= 0.0:
        raise ValueError("satellite altitude must be positive")
    sin_b = math.sin(math.radians(bla_deg))
    ratio = (R_EARTH_KM + sat_altitude_km) / R_EARTH_KM
    cos_alpha = ratio * sin_b
    if cos_alpha >= 1.0:
        raise ValueError(f"look angle {bla_deg} deg misses the Earth "
                         f"(limb at {math.degrees(math.asin(1.0 / ratio)):.2f} deg)")
    return math.degrees(math.acos(cos_alpha))


def altitude_for_elevation(bla_deg: float, elevation_deg: float) -> float:
    """Satellite altitude that pairs a look angle with a ground elevation.

    Inverts :func:`elevation_from_bla`; used to back-derive the scenario
    altitude (about 489 km) from the published look-angle/elevation pairs.
    """
    sin_b = math.sin(math.radians(bla_deg))
    if sin_b <= 0.0:
        raise ValueError("look angle must be positive to invert the geometry")
    h = R_EARTH_KM * (math.cos(math.radians(elevation_deg)) / sin_b - 1.0)
    if h <= 0.0:
        raise ValueError("geometry implies a non-positive altitude")
    return h


def _track_frame(sat: SatelliteState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(nadir, along-track, right-of-track) unit vectors.

    Without a velocity (fixed scenario positions) the along-track axis
    defaults to local north, making ``azimuth=90`` point due east.
    """
    r = sat.position_km
    r_hat = r / np.linalg.norm(r)
    if sat.velocity_km_s is not None and np.linalg.norm(sat.velocity_km_s) > 0:
        v = sat.velocity_km_s
        t = v - np.dot(v, r_hat) * r_hat
    else:
        z = np.array([0.0, 0.0, 1.0])
        t = z - np.dot(z, r_hat) * r_hat
    t_hat = t / np.linalg.norm(t)
    right = np.cross(t_hat, r_hat)
    return -r_hat, t_hat, right


def boresight_direction(sat: SatelliteState, pointing: BeamPointing) -> np.ndarray:
    """Unit boresight vector in ECEF for a spotlight pointing."""
    nadir, along, right = _track_frame(sat)
    b = math.radians(pointing.bla_deg)
    az = math.radians(pointing.azimuth_deg)
    return (math.cos(b) * nadir
            + math.sin(b) * (math.cos(az) * along + math.sin(az) * right))


def footprint_center(sat: SatelliteState, pointing: BeamPointing) -> GeodeticPosition:
    """Geodetic point where the boresight ray meets the spherical Earth."""
    r = sat.position_km
    d = boresight_direction(sat, pointing)
    rd = float(np.dot(r, d))
    disc = rd * rd - (float(np.dot(r, r)) - R_EARTH_KM ** 2)
    if disc < 0.0:
        raise ValueError("boresight ray does not intersect the Earth")
    s = -rd - math.sqrt(disc)
    if s < 0.0:
        raise ValueError("Earth intersection lies behind the satellite")
    return geodetic_from_ecef(r + s * d)


def slant_range_and_look(bs: GeodeticPosition, sat: SatelliteState
                         ) -> tuple[float, float, float]:
    """Range (km), ENU elevation and azimuth (deg) of ``sat`` seen from ``bs``."""
    r_bs = ecef_from_geodetic(bs)
    d = sat.position_km - r_bs
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        raise ValueError("coincident observer and satellite")
    up = r_bs / np.linalg.norm(r_bs)
    east = np.cross(np.array([0.0, 0.0, 1.0]), up)
    east /= np.linalg.norm(east)
    north = np.cross(up, east)
    elev = math.degrees(math.asin(max(-1.0, min(1.0, float(np.dot(d, up)) / dist))))
    az = math.degrees(math.atan2(float(np.dot(d, east)), float(np.dot(d, north))))
    return dist, elev, az


def gcs_to_lcs_arrays(elevation_deg, azimuth_deg, bearing_deg, downtilt_deg):
    """Vectorized GCS ray to panel-frame (theta, phi); all angles degrees.

    Two chained rotations: bearing about the vertical, then mechanical
    downtilt about the panel horizontal axis.
    """
    theta = np.radians(90.0 - np.asarray(elevation_deg, dtype=float))
    dphi = np.radians(np.asarray(azimuth_deg, dtype=float) - bearing_deg)
    tilt = np.radians(downtilt_deg)
    ct, st = np.cos(tilt), np.sin(tilt)
    cth, sth = np.cos(theta), np.sin(theta)
    cos_tp = np.clip(ct * cth + st * sth * np.cos(dphi), -1.0, 1.0)
    theta_p = np.degrees(np.arccos(cos_tp))
    phi_p = np.degrees(np.arctan2(sth * np.sin(dphi),
                                  ct * sth * np.cos(dphi) - st * cth))
    return theta_p, phi_p


def gcs_to_lcs(gcs_elevation_deg: float, gcs_azimuth_deg: float,
               panel: PanelOrientation) -> LocalDirection:
    """Panel-frame direction of a GCS ray given the panel orientation."""
    theta_p, phi_p = gcs_to_lcs_arrays(gcs_elevation_deg, gcs_azimuth_deg,
                                       panel.bearing_deg, panel.mech_downtilt_deg)
    return LocalDirection(float(theta_p), float(phi_p))


def lcs_to_gcs(local: LocalDirection, panel: PanelOrientation
               ) -> tuple[float, float]:
    """Inverse of :func:`gcs_to_lcs`; returns (elevation, azimuth) degrees."""
    theta_p = math.radians(local.theta_deg)
    phi_p = math.radians(local.phi_deg)
    tilt = math.radians(panel.mech_downtilt_deg)
    ct, st = math.cos(tilt), math.sin(tilt)
    ctp, stp = math.cos(theta_p), math.sin(theta_p)
    cos_t = max(-1.0, min(1.0, ct * ctp - st * stp * math.cos(phi_p)))
    theta = math.degrees(math.acos(cos_t))
    az = panel.bearing_deg + math.degrees(
        math.atan2(stp * math.sin(phi_p), ct * stp * math.cos(phi_p) + st * ctp))
    az = math.remainder(az, 360.0)
    return 90.0 - theta, az


def destination_arrays(lon_deg, lat_deg, bearing_deg, arc_deg):
    """Great-circle destination on the sphere; inputs/outputs in degrees."""
    lat1 = np.radians(np.asarray(lat_deg, dtype=float))
    lon1 = np.radians(np.asarray(lon_deg, dtype=float))
    brg = np.radians(np.asarray(bearing_deg, dtype=float))
    sig = np.radians(np.asarray(arc_deg, dtype=float))
    sin_lat2 = np.sin(lat1) * np.cos(sig) + np.cos(lat1) * np.sin(sig) * np.cos(brg)
    sin_lat2 = np.clip(sin_lat2, -1.0, 1.0)
    lat2 = np.arcsin(sin_lat2)
    lon2 = lon1 + np.arctan2(np.sin(brg) * np.sin(sig) * np.cos(lat1),
                             np.cos(sig) - np.sin(lat1) * sin_lat2)
    lon2 = np.degrees(lon2)
    lon2 = (lon2 + 180.0) % 360.0 - 180.0
    return lon2, np.degrees(lat2)


def destination_point(origin: GeodeticPosition, bearing_deg: float,
                      arc_deg: float) -> GeodeticPosition:
    lon, lat = destination_arrays(origin.longitude_deg, origin.latitude_deg,
                                  bearing_deg, arc_deg)
    return GeodeticPosition(float(lon), float(lat), origin.altitude_km)


def great_circle_arc_deg(a: GeodeticPosition, b: GeodeticPosition) -> float:
    """Central angle between two geodetic points, degrees."""
    la, lb = math.radians(a.latitude_deg), math.radians(b.latitude_deg)
    dlon = math.radians(b.longitude_deg - a.longitude_deg)
    h = (math.sin((lb - la) / 2.0) ** 2
         + math.cos(la) * math.cos(lb) * math.sin(dlon / 2.0) ** 2)
    return math.degrees(2.0 * math.asin(min(1.0, math.sqrt(h))))
