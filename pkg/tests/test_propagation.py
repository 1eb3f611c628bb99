import csv
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imtsar import propagation as prop

DATA = pathlib.Path(__file__).parent / "data" / "p2108_reference.csv"


def test_fspl_spot_value():
    # 92.45 + 20log10(10) + 20log10(500)
    assert prop.fspl_db(500.0, 10.0) == pytest.approx(166.4297, abs=1e-3)


def test_fspl_scaling():
    base = prop.fspl_db(100.0, 10.2)
    assert prop.fspl_db(200.0, 10.2) == pytest.approx(base + 20.0 * np.log10(2))
    assert prop.fspl_db(100.0, 20.4) == pytest.approx(base + 20.0 * np.log10(2))


def test_fspl_rejects_nonpositive():
    with pytest.raises(ValueError):
        prop.fspl_db(0.0, 10.2)
    with pytest.raises(ValueError):
        prop.fspl_db(100.0, -1.0)


def test_clutter_against_independent_reference():
    # table computed with an arbitrary-precision implementation kept out of
    # the package (own inverse-normal), frozen under tests/data/
    with DATA.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 189
    for row in rows:
        got = prop.clutter_loss_db(float(row["frequency_ghz"]),
                                   float(row["elevation_deg"]),
                                   float(row["p_percent"]))
        assert got == pytest.approx(float(row["loss_db"]), abs=1e-9), row


def test_clutter_zenith_is_pure_gaussian_tail():
    # exponent vanishes at 90 deg: only the -0.6*Qinv(p) term remains
    assert prop.clutter_loss_db(10.2, 90.0, 50.0) == pytest.approx(0.0, abs=1e-12)
    lo = prop.clutter_loss_db(10.2, 90.0, 1.0)
    hi = prop.clutter_loss_db(10.2, 90.0, 99.0)
    assert lo == pytest.approx(-hi, abs=1e-12)
    assert hi == pytest.approx(1.3958, abs=1e-3)


def test_clutter_negative_tail_not_clamped():
    assert prop.clutter_loss_db(10.2, 34.43, 1.0) < 0.0


def test_clutter_domain_errors():
    with pytest.raises(ValueError):
        prop.clutter_loss_db(9.9, 45.0, 50.0)
    with pytest.raises(ValueError):
        prop.clutter_loss_db(10.2, 91.0, 50.0)
    with pytest.raises(ValueError):
        prop.clutter_loss_db(10.2, 45.0, 0.0)
    with pytest.raises(ValueError):
        prop.clutter_loss_db(10.2, 45.0, 100.0)


@settings(max_examples=200, deadline=None)
@given(elev=st.floats(0.0, 90.0),
       p=st.floats(0.5, 99.5),
       f=st.floats(10.0, 100.0))
def test_clutter_monotonic_in_p(elev, p, f):
    # higher location percentage never decreases the loss
    lo = prop.clutter_loss_db(f, elev, p)
    hi = prop.clutter_loss_db(f, elev, min(p + 0.4, 99.9))
    assert hi >= lo - 1e-12


@settings(max_examples=200, deadline=None)
@given(elev=st.floats(0.0, 85.0), p=st.floats(1.0, 99.0))
def test_clutter_near_monotonic_in_elevation(elev, p):
    # the model is not strictly monotonic close to zenith (crossover of the
    # power-law and Gaussian terms, order 0.02 dB), so allow that slack
    lo = prop.clutter_loss_db(10.2, elev + 1.0, p)
    hi = prop.clutter_loss_db(10.2, elev, p)
    assert hi >= lo - 0.03


def test_quantile_sampler_matches_percentage_form():
    rng = np.random.default_rng(5)
    q = rng.uniform(0.01, 0.99, size=50)
    a = prop.clutter_loss_from_quantile(10.2, 34.43, q)
    b = prop.clutter_loss_db(10.2, 34.43, 100.0 * q)
    np.testing.assert_allclose(a, b, rtol=0, atol=0)


def test_mean_effective_clutter():
    # effective attenuation of the averaged linear transmission factor at
    # the low-elevation scenario geometry
    p = (np.arange(1, 200001) / 200001) * 100.0
    lin = 10.0 ** (-prop.clutter_loss_db(10.2, 34.43, p) / 10.0)
    eff = -10.0 * np.log10(lin.mean())
    assert eff == pytest.approx(3.016, abs=0.002)


def test_path_loss_breakdown():
    pl = prop.path_loss(550.0, 10.2, 34.43, clutter_p_percent=50.0)
    assert pl.polarization_db == 3.0
    assert pl.clutter_db == pytest.approx(3.5177, abs=1e-3)
    assert pl.total_db == pytest.approx(pl.fspl_db + pl.clutter_db + 3.0)
    clear = prop.path_loss(550.0, 10.2, 34.43, clutter_p_percent=None)
    assert clear.clutter_db == 0.0
