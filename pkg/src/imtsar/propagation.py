"""Propagation terms on the Earth-to-space path.

Free-space loss plus the statistical Earth-space clutter model of
ITU-R P.2108-1 section 3.3, and a fixed polarization mismatch.  Clutter is
evaluated at whatever location percentage the caller draws; low percentages
give negative values (signal enhancement relative to median) and those are
kept as the model produces them, not clamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

POLARIZATION_LOSS_DB = 3.0  # fixed linear-to-linear misalignment allowance

# ITU-R P.2108-1 section 3.3 shape constant (A1); K1 depends on frequency
_CLUTTER_A1 = 0.05


def fspl_db(distance_km, frequency_ghz):
    """Free-space path loss, dB; accepts scalars or arrays."""
    d = np.asarray(distance_km, dtype=float)
    f = np.asarray(frequency_ghz, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be positive")
    if np.any(f <= 0.0):
        raise ValueError("frequency must be positive")
    out = 92.45 + 20.0 * np.log10(f) + 20.0 * np.log10(d)
    return float(out) if np.isscalar(distance_km) and np.isscalar(frequency_ghz) else out


def clutter_loss_db(frequency_ghz, elevation_deg, p_percent):
    """Earth-space clutter loss not exceeded for ``p_percent`` of locations.

    ITU-R P.2108-1 section 3.3, valid 10-100 GHz and elevations 0-90 deg.
    Vectorized over any mix of scalar and array arguments.
    """
    f = np.asarray(frequency_ghz, dtype=float)
    theta = np.asarray(elevation_deg, dtype=float)
    p = np.asarray(p_percent, dtype=float)
    if np.any((f < 10.0) | (f > 100.0)):
        raise ValueError("frequency outside the 10-100 GHz validity range")
    if np.any((theta < 0.0) | (theta > 90.0)):
        raise ValueError("elevation outside [0, 90] deg")
    if np.any((p <= 0.0) | (p >= 100.0)):
        raise ValueError("location percentage must lie strictly in (0, 100)")

    k1 = 93.0 * f ** 0.175
    angle = _CLUTTER_A1 * (1.0 - theta / 90.0) + np.pi * theta / 180.0
    cot = np.cos(angle) / np.sin(angle)
    base = -k1 * np.log(1.0 - p / 100.0) * cot
    # at 90 deg elevation the exponent is 0 and base underflows to ~0;
    # 0**0 == 1 keeps the zenith limit exact
    expo = 0.5 * (90.0 - theta) / 90.0
    out = base ** expo - 1.0 - 0.6 * ndtri(1.0 - p / 100.0)
    if out.ndim == 0:
        return float(out)
    return out


def clutter_loss_from_quantile(frequency_ghz, elevation_deg, quantile):
    """Clutter loss for a uniform (0, 1) draw; the Monte Carlo sampler."""
    q = np.asarray(quantile, dtype=float)
    return clutter_loss_db(frequency_ghz, elevation_deg, 100.0 * q)


@dataclass(frozen=True)
class PathLossBreakdown:
    """Per-term path loss, all dB; ``total_db`` is their plain sum."""

    fspl_db: float
    clutter_db: float
    polarization_db: float

    @property
    def total_db(self) -> float:
        return self.fspl_db + self.clutter_db + self.polarization_db


def path_loss(distance_km: float, frequency_ghz: float, elevation_deg: float,
              clutter_p_percent: float | None = 50.0) -> PathLossBreakdown:
    """Full path budget for one station-to-satellite link.

    ``clutter_p_percent=None`` drops the clutter term (clear line of sight).
    """
    clut = 0.0 if clutter_p_percent is None else float(
        clutter_loss_db(frequency_ghz, elevation_deg, clutter_p_percent))
    return PathLossBreakdown(
        fspl_db=float(fspl_db(distance_km, frequency_ghz)),
        clutter_db=clut,
        polarization_db=POLARIZATION_LOSS_DB,
    )
