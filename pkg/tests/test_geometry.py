import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imtsar import geometry as geo

ELEMENTS = geo.KeplerianElements(
    periapsis_altitude_km=240.2753,
    eccentricity=0.0202,
    inclination_deg=88.0008,
    raan_deg=273.9587,
    arg_periapsis=180.9383,
    true_anomaly_deg=180.4155,
)


def test_semi_major_axis_and_apoapsis():
    assert ELEMENTS.semi_major_axis_km == pytest.approx(6754.8605, abs=1e-3)
    assert ELEMENTS.apoapsis_altitude_km == pytest.approx(513.17, abs=0.01)


def test_orbit_energy_invariant():
    # two-body specific energy -mu/2a must survive the ECEF transform
    a = ELEMENTS.semi_major_axis_km
    expected = -geo.MU_EARTH_KM3_S2 / (2.0 * a)
    omega = np.array([0.0, 0.0, geo.OMEGA_EARTH_RAD_S])
    for t in [0.0, 137.0, 1500.5, 4000.0, 5600.0]:
        s = geo.propagate_orbit(ELEMENTS, t)
        v_eci = s.velocity_km_s + np.cross(omega, s.position_km)
        r = np.linalg.norm(s.position_km)
        eps = float(v_eci @ v_eci) / 2.0 - geo.MU_EARTH_KM3_S2 / r
        assert eps == pytest.approx(expected, rel=1e-9)


def test_orbit_altitude_stays_between_apsides():
    for t in np.linspace(0.0, 6000.0, 61):
        s = geo.propagate_orbit(ELEMENTS, float(t))
        assert 240.2753 - 1e-6 <= s.altitude_km <= 513.17 + 0.01


def test_arg_periapsis_radian_reading_is_available():
    lit = geo.KeplerianElements(240.2753, 0.0202, 88.0008, 273.9587,
                                180.9383, 180.4155,
                                arg_periapsis_is_radians=True)
    expect = math.degrees(180.9383) % 360.0
    assert lit.arg_periapsis_deg % 360.0 == pytest.approx(expect)
    # both readings still propagate to the same radius (same anomaly)
    assert geo.propagate_orbit(lit, 0.0).altitude_km == pytest.approx(
        geo.propagate_orbit(ELEMENTS, 0.0).altitude_km, abs=1e-6)


def test_scenario_altitude_ties_look_angles_to_elevations():
    h = geo.altitude_for_elevation(50.0, 34.43)
    assert h == pytest.approx(489.35, abs=0.01)
    assert geo.elevation_from_bla(50.0, h) == pytest.approx(34.43, abs=1e-9)
    assert geo.elevation_from_bla(18.0, h) == pytest.approx(70.57, abs=0.05)


def test_nadir_pointing_hits_subsatellite_point():
    sat = geo.propagate_orbit(ELEMENTS, 1234.0)
    fc = geo.footprint_center(sat, geo.BeamPointing(bla_deg=0.0))
    assert geo.great_circle_arc_deg(fc, sat.geodetic) < 1e-9


def test_look_angle_past_limb_rejected():
    h = 489.35
    limb = math.degrees(math.asin(geo.R_EARTH_KM / (geo.R_EARTH_KM + h)))
    with pytest.raises(ValueError):
        geo.elevation_from_bla(limb + 0.1, h)
    geo.elevation_from_bla(limb - 0.1, h)  # just inside is fine


def test_footprint_elevation_matches_law_of_sines():
    # elevation of the satellite seen from its own footprint center must
    # equal the analytic value for that look angle
    h = geo.altitude_for_elevation(50.0, 34.43)
    sat = geo.SatelliteState(
        np.array([geo.R_EARTH_KM + h, 0.0, 0.0]), None,
        geo.GeodeticPosition(0.0, 0.0, h))
    for bla in [18.0, 34.0, 50.0]:
        fc = geo.footprint_center(sat, geo.BeamPointing(bla))
        _, elev, _ = geo.slant_range_and_look(fc, sat)
        assert elev == pytest.approx(geo.elevation_from_bla(bla, h), abs=1e-6)


def test_footprint_azimuth_uses_track_frame():
    # with a velocity, azimuth=90 points right of track; flip the velocity
    # and the footprint lands on the other side
    h = 489.35
    r = np.array([geo.R_EARTH_KM + h, 0.0, 0.0])
    v = np.array([0.0, 0.0, 7.6])  # heading north over the equator
    sat_n = geo.SatelliteState(r, v, geo.GeodeticPosition(0.0, 0.0, h))
    sat_s = geo.SatelliteState(r, -v, geo.GeodeticPosition(0.0, 0.0, h))
    east = geo.footprint_center(sat_n, geo.BeamPointing(50.0))
    west = geo.footprint_center(sat_s, geo.BeamPointing(50.0))
    assert east.longitude_deg > 0.0 > west.longitude_deg
    assert east.longitude_deg == pytest.approx(-west.longitude_deg, abs=1e-9)


def test_mechanical_downtilt_example():
    panel = geo.PanelOrientation(bearing_deg=0.0, mech_downtilt_deg=10.0)
    loc = geo.gcs_to_lcs(0.0, 0.0, panel)
    assert loc.theta_deg == pytest.approx(80.0, abs=1e-12)
    assert loc.phi_deg == pytest.approx(0.0, abs=1e-12)
    # ray from behind the panel
    behind = geo.gcs_to_lcs(0.0, 180.0, geo.PanelOrientation(0.0, 0.0))
    assert abs(behind.phi_deg) == pytest.approx(180.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(elev=st.floats(-89.9, 89.9), az=st.floats(-180.0, 180.0),
       bearing=st.floats(-180.0, 180.0), tilt=st.floats(-30.0, 30.0))
def test_lcs_round_trip(elev, az, bearing, tilt):
    panel = geo.PanelOrientation(bearing, tilt)
    loc = geo.gcs_to_lcs(elev, az, panel)
    assert 0.0 <= loc.theta_deg <= 180.0
    elev2, az2 = geo.lcs_to_gcs(loc, panel)
    assert elev2 == pytest.approx(elev, abs=1e-9)
    if abs(elev) < 89.0:  # azimuth degenerate near the poles of the frame
        daz = math.remainder(az2 - az, 360.0)
        assert abs(daz) < 1e-9


@settings(max_examples=200, deadline=None)
@given(lon=st.floats(-179.0, 179.0), lat=st.floats(-80.0, 80.0),
       brg=st.floats(0.0, 360.0), arc=st.floats(1e-4, 1.0))
def test_destination_arc_length(lon, lat, brg, arc):
    origin = geo.GeodeticPosition(lon, lat)
    dest = geo.destination_point(origin, brg, arc)
    assert geo.great_circle_arc_deg(origin, dest) == pytest.approx(arc, rel=1e-6)


def test_ecef_round_trip():
    p = geo.GeodeticPosition(-48.0187, -23.6060, 0.0)
    q = geo.geodetic_from_ecef(geo.ecef_from_geodetic(p))
    assert q.longitude_deg == pytest.approx(p.longitude_deg, abs=1e-9)
    assert q.latitude_deg == pytest.approx(p.latitude_deg, abs=1e-9)
    assert q.altitude_km == pytest.approx(0.0, abs=1e-9)


def test_validation_errors():
    with pytest.raises(ValueError):
        geo.GeodeticPosition(200.0, 0.0)
    with pytest.raises(ValueError):
        geo.KeplerianElements(240.0, 1.5, 88.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        geo.BeamPointing(bla_deg=95.0)
    with pytest.raises(ValueError):
        geo.altitude_for_elevation(50.0, 89.99)  # implies negative altitude
