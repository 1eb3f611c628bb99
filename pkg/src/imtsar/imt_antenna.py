"""Base-station active-antenna patterns: element, beamformed composite,
Taylor sidelobe tapers, whole-sphere gain integration and EIRP bookkeeping.

The element and composite patterns follow Rec. ITU-R M.2101 Annex 1
section 5 with an 8x8 half-wavelength panel.  The sidelobe-suppressed
variant replaces the uniform amplitudes with a Taylor line taper and
normalizes the pattern by its own spherical integral (evaluated per
steering pair) so the tapered array radiates 0 dB total integrated gain
before ohmic effects.

Amplitude scaling convention: taper coefficients are scaled to a maximum
of 1, so no element is driven above its rated conducted power; a tapered
panel therefore radiates less total power than the uniform one, which is
exactly the sidelobe-suppression trade the normalization accounts for.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.signal.windows import taylor as _scipy_taylor


@dataclass(frozen=True)
class ElementPattern:
    """Single-element envelope per M.2101 Annex 1 section 5."""

    gain_max_dbi: float = 5.5
    hbw_deg: float = 90.0
    vbw_deg: float = 90.0
    front_to_back_db: float = 30.0  # A_m and SLA_v share this value here


@dataclass(frozen=True)
class ArrayConfig:
    n_h: int = 8
    n_v: int = 8
    spacing_h_wl: float = 0.5
    spacing_v_wl: float = 0.5
    polarizations: int = 2
    # ohmic loss is already inside the 5.5 dBi element figure; kept for
    # bookkeeping only and never subtracted again
    ohmic_loss_db: float = 2.0
    conducted_power_per_element_dbm: float = 16.0
    extra_power_db: float = 2.0
    element: ElementPattern = field(default_factory=ElementPattern)

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("array dimensions must be at least 1")
        if self.spacing_h_wl <= 0.0 or self.spacing_v_wl <= 0.0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v


DEFAULT_ARRAY = ArrayConfig()

# electrical downtilt limits for a 10 deg mechanical downtilt: total
# vertical pointing (zenith angle of the beam peak) must stay in [90, 120]
ETILT_MIN_DEG = -10.0
ETILT_MAX_DEG = 20.0
SCAN_LIMIT_DEG = 60.0


@dataclass(frozen=True)
class SteeringAngles:
    """Electrical downtilt and azimuth scan of the beam peak, degrees.

    Positive ``etilt_deg`` points the beam below the panel normal.
    """

    etilt_deg: float
    scan_deg: float

    def __post_init__(self):
        if not -SCAN_LIMIT_DEG <= self.scan_deg <= SCAN_LIMIT_DEG:
            raise ValueError(f"scan {self.scan_deg} outside +/-{SCAN_LIMIT_DEG} deg")
        if not ETILT_MIN_DEG <= self.etilt_deg <= ETILT_MAX_DEG:
            raise ValueError(
                f"electrical tilt {self.etilt_deg} outside "
                f"[{ETILT_MIN_DEG}, {ETILT_MAX_DEG}] deg")


@dataclass(frozen=True)
class WeightMatrix:
    """Separable real amplitude taper, one window per array axis.

    ``amplitudes`` is the outer product (n_v x n_h) used by the pattern
    ops; both windows are scaled to a maximum coefficient of 1.
    """

    v_taper: np.ndarray
    h_taper: np.ndarray
    family: str = "uniform"
    target_sll_db: float | None = None

    def __post_init__(self):
        for t in (self.v_taper, self.h_taper):
            if np.any(np.asarray(t) <= 0.0):
                raise ValueError("taper coefficients must be positive")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.outer(self.v_taper, self.h_taper)

    def cache_key(self) -> bytes:
        return self.v_taper.tobytes() + b"|" + self.h_taper.tobytes()


def uniform_weights(cfg: ArrayConfig = DEFAULT_ARRAY) -> WeightMatrix:
    return WeightMatrix(np.ones(cfg.n_v), np.ones(cfg.n_h), family="uniform")


def element_gain(theta_deg, phi_deg, pattern: ElementPattern = ElementPattern()):
    """M.2101 single-element gain, dBi; vectorized over theta/phi arrays."""
    theta = np.asarray(theta_deg, dtype=float)
    phi = np.asarray(phi_deg, dtype=float)
    am = pattern.front_to_back_db
    a_h = -np.minimum(12.0 * (phi / pattern.hbw_deg) ** 2, am)
    a_v = -np.minimum(12.0 * ((theta - 90.0) / pattern.vbw_deg) ** 2, am)
    out = pattern.gain_max_dbi - np.minimum(-(a_h + a_v), am)
    if out.ndim == 0:
        return float(out)
    return out


def _axis_factor(n: int, spacing_wl: float, taper, psi):
    """|sum_k t_k exp(j 2 pi spacing k psi)| for one array axis."""
    k = np.arange(n)
    phase = np.exp(2j * np.pi * spacing_wl * np.outer(np.asarray(psi, float), k))
    return phase @ np.asarray(taper, dtype=complex)


def composite_gain(theta_deg, phi_deg, etilt_deg, scan_deg,
                   weights: WeightMatrix | None = None,
                   cfg: ArrayConfig = DEFAULT_ARRAY,
                   normalizer: "PatternNormalizer | None" = None):
    """Beamformed array gain, dBi, broadcast over all four angle inputs.

    The phase term separates into vertical and horizontal line factors, so
    the 2-D element sum is evaluated as a product of two 1-D sums.  With
    ``normalizer`` given, the per-steering spherical-integral denominator
    is subtracted (the tapered-pattern directivity normalization).
    """
    if weights is None:
        weights = uniform_weights(cfg)
    theta, phi, etilt, scan = np.broadcast_arrays(
        np.asarray(theta_deg, float), np.asarray(phi_deg, float),
        np.asarray(etilt_deg, float), np.asarray(scan_deg, float))
    th = np.radians(theta)
    # beam-peak phase references: vertical sin(etilt), horizontal
    # -cos(etilt) sin(scan); the signs put the peak at
    # theta = 90 + etilt, phi = scan
    psi_v = np.cos(th) + np.sin(np.radians(etilt))
    psi_h = (np.sin(th) * np.sin(np.radians(phi))
             - np.cos(np.radians(etilt)) * np.sin(np.radians(scan)))
    fv = _axis_factor(cfg.n_v, cfg.spacing_v_wl, weights.v_taper, psi_v.ravel())
    fh = _axis_factor(cfg.n_h, cfg.spacing_h_wl, weights.h_taper, psi_h.ravel())
    af = (np.abs(fv) * np.abs(fh)) ** 2 / cfg.n_elements
    af = af.reshape(theta.shape)
    out = element_gain(theta, phi, cfg.element) + 10.0 * np.log10(
        np.maximum(af, 1e-300))
    if normalizer is not None:
        out = out - normalizer.denominator_db(etilt, scan)
    if np.ndim(out) == 0:
        return float(out)
    return out


def flattened_weights(steer: SteeringAngles, weights: WeightMatrix | None = None,
                      cfg: ArrayConfig = DEFAULT_ARRAY) -> np.ndarray:
    """Complex element weights, flattened row-major [v * n_h + h].

    Normalized by 1/sqrt(n_elements) so the uniform taper carries unit
    total power; tapered variants carry less (max-1 amplitude scaling).
    """
    n = np.arange(cfg.n_v)
    m = np.arange(cfg.n_h)
    if weights is None:
        weights = uniform_weights(cfg)
    pv = np.exp(2j * np.pi * cfg.spacing_v_wl * n
                * math.sin(math.radians(steer.etilt_deg)))
    ph = np.exp(-2j * np.pi * cfg.spacing_h_wl * m
                * math.cos(math.radians(steer.etilt_deg))
                * math.sin(math.radians(steer.scan_deg)))
    w = np.outer(weights.v_taper * pv, weights.h_taper * ph)
    return (w / math.sqrt(cfg.n_elements)).ravel()


def first_sidelobe_level_db(taper, spacing_wl: float = 0.5) -> float:
    """Level of the first sidelobe of the line pattern, dB below the peak.

    Scans the visible-space variable u = sin(angle) over (0, 1]; with
    half-wavelength spacing that stops short of the grating-lobe replica.
    """
    t = np.asarray(taper, dtype=float)
    u = np.linspace(0.0, 1.0, 20001)
    f = np.abs(_axis_factor(t.size, spacing_wl, t, u))
    g = 20.0 * np.log10(np.maximum(f / f[0], 1e-12))
    mins = np.flatnonzero((g[1:-1] < g[:-2]) & (g[1:-1] <= g[2:])) + 1
    if mins.size == 0:
        raise ValueError("no null found in the visible region")
    first_null = mins[0]
    maxima = np.flatnonzero((g[1:-1] >= g[:-2]) & (g[1:-1] > g[2:])) + 1
    maxima = maxima[maxima > first_null]
    if maxima.size == 0:
        raise ValueError("no sidelobe found after the first null")
    return float(g[maxima[0]])


def _one_parameter_window(n: int, attenuation_db: float) -> np.ndarray:
    """Taylor one-parameter window, edge-sampled, max-1 normalized.

    ``attenuation_db`` is the design sidelobe attenuation (positive dB).
    13.26 dB is the uniform line source; the window solves
    13.26 + 20*log10(sinh(pi*B)/(pi*B)) = attenuation for pi*B and samples
    I0(pi*B*sqrt(1-x^2)) at the element positions spanning [-1, 1].
    """
    excess = attenuation_db - 13.26
    if excess < -1e-9:
        raise ValueError("sidelobe attenuation below the uniform-source 13.26 dB")
    if excess <= 1e-9:
        return np.ones(n)
    pb = brentq(lambda x: 20.0 * np.log10(np.sinh(x) / x) - excess, 1e-6, 60.0)
    x = (2.0 * np.arange(n) - (n - 1)) / (n - 1)
    w = np.i0(pb * np.sqrt(1.0 - x * x))
    return w / w.max()


def _nbar_window(n: int, attenuation_db: float, n_bar: int) -> np.ndarray:
    """n-bar Taylor window with the design level compensated so the
    synthesized 8-element line pattern realizes the requested level.

    The textbook design attenuation applies to the continuous line
    source; sampled at 8 elements the first sidelobe lands a couple of dB
    high, so the design value is raised until the realized level matches.
    """
    if n_bar < 1:
        raise ValueError("n_bar must be at least 1")

    def realized(design_db):
        w = _scipy_taylor(n, nbar=n_bar, sll=design_db, norm=False)
        return first_sidelobe_level_db(w)

    try:
        design = brentq(lambda d: realized(d) + attenuation_db,
                        attenuation_db - 2.0, attenuation_db + 15.0)
    except ValueError as exc:
        raise ValueError(
            f"n_bar={n_bar} cannot realize {attenuation_db} dB sidelobes "
            f"on a {n}-element line") from exc
    w = _scipy_taylor(n, nbar=n_bar, sll=design, norm=False)
    return w / w.max()


def taylor_weights(n: int = 8, sll_db: float = -30.0, n_bar: int = 4,
                   family: str = "one-parameter",
                   axes: str = "vertical",
                   cfg: ArrayConfig = DEFAULT_ARRAY) -> WeightMatrix:
    """Taylor amplitude taper targeting first sidelobes at ``sll_db``.

    Parameters
    ----------
    n : int
        Elements per tapered axis.
    sll_db : float
        Target first-sidelobe level relative to the peak, dB (negative;
        -13.26 or shallower degenerates to the uniform taper).
    n_bar : int
        Near-in sidelobe count for the n-bar family; ignored by the
        one-parameter family.
    family : str
        "one-parameter" (default) or "nbar".  Both are compensated for the
        8-element sampling so the synthesized line pattern meets the
        target; the one-parameter window lands well below it.
    axes : str
        "vertical" (default) tapers the tilt axis only, which keeps the
        whole-sphere integral of the composite in the intended -6..-3 dB
        band; "both" tapers the scan axis too (stronger suppression,
        lower total radiated power).
    """
    if sll_db > -13.26 + 1e-9:
        raise ValueError("sll_db must be at or below -13.26 dB")
    if family == "one-parameter":
        line = _one_parameter_window(n, -sll_db)
    elif family == "nbar":
        line = _nbar_window(n, -sll_db, n_bar)
    else:
        raise ValueError(f"unknown taper family {family!r}")
    if axes == "vertical":
        return WeightMatrix(line, np.ones(cfg.n_h), family=family,
                            target_sll_db=sll_db)
    if axes == "both":
        return WeightMatrix(line, line.copy(), family=family,
                            target_sll_db=sll_db)
    raise ValueError(f"unknown axes selection {axes!r}")


@functools.lru_cache(maxsize=4)
def _pattern_gram_matrix(n_v: int, n_h: int, sv: float, sh: float,
                         step_deg: float) -> np.ndarray:
    """Hermitian Gram matrix G of the element responses over the sphere.

    G = sum over the grid of d_elem(theta, phi) * sin(theta) * dA *
    conj(z) z^T with z the flattened element phase vector, so the
    whole-sphere integral of any beamformed pattern is w^H G w.  Built
    once per array geometry; steering and taper live entirely in w.
    """
    step = math.radians(step_deg)
    theta = np.arange(step_deg / 2.0, 180.0, step_deg)
    phi = np.arange(-180.0 + step_deg / 2.0, 180.0, step_deg)
    th = np.radians(theta)
    ph = np.radians(phi)
    n = np.arange(n_v)
    m = np.arange(n_h)
    g = np.zeros((n_v * n_h, n_v * n_h), dtype=complex)
    block = 16
    for i0 in range(0, theta.size, block):
        th_b = th[i0:i0 + block]
        tt, pp = np.meshgrid(th_b, ph, indexing="ij")
        zv = np.exp(2j * np.pi * sv * np.outer(np.cos(tt).ravel(), n))
        zh = np.exp(2j * np.pi * sh * np.outer(
            (np.sin(tt) * np.sin(pp)).ravel(), m))
        z = (zv[:, :, None] * zh[:, None, :]).reshape(-1, n_v * n_h)
        d_lin = 10.0 ** (element_gain(np.degrees(tt).ravel(),
                                      np.degrees(pp).ravel()) / 10.0)
        coeff = d_lin * np.sin(tt).ravel() * step * step
        g += (z.conj() * coeff[:, None]).T @ z
    return g


class PatternNormalizer:
    """Spherical-integral bookkeeping for one taper choice.

    Exposes the exact total integrated gain for arbitrary steering and a
    1-degree-quantized denominator table used by the directivity
    normalization.  Interpolation between table entries is deliberately
    not offered; the nearest quantized steering pair is used, which is
    the documented convention for the Monte Carlo.
    """

    def __init__(self, weights: WeightMatrix | None = None,
                 cfg: ArrayConfig = DEFAULT_ARRAY, step_deg: float = 0.5):
        if step_deg > 1.0:
            raise ValueError("quadrature step must be at most 1 degree")
        self.cfg = cfg
        self.weights = weights if weights is not None else uniform_weights(cfg)
        self.step_deg = step_deg
        self._table = None

    @property
    def _gram(self) -> np.ndarray:
        return _pattern_gram_matrix(self.cfg.n_v, self.cfg.n_h,
                                    self.cfg.spacing_v_wl,
                                    self.cfg.spacing_h_wl, self.step_deg)

    def total_integrated_gain(self, etilt_deg: float, scan_deg: float) -> float:
        """Exact whole-sphere integral of the steered pattern, dB.

        10*log10((1/4pi) * integral of linear gain * sin(theta) dtheta dphi);
        0 dB marks a pattern radiating exactly the power it was fed.
        """
        w = flattened_weights(SteeringAngles(etilt_deg, scan_deg),
                              self.weights, self.cfg)
        val = float(np.real(w.conj() @ self._gram @ w)) / (4.0 * np.pi)
        return 10.0 * math.log10(val)

    def _build_table(self):
        et = np.arange(int(ETILT_MIN_DEG), int(ETILT_MAX_DEG) + 1, dtype=float)
        sc = np.arange(int(-SCAN_LIMIT_DEG), int(SCAN_LIMIT_DEG) + 1, dtype=float)
        ws = np.empty((et.size * sc.size, self.cfg.n_elements), dtype=complex)
        k = 0
        for e in et:
            for s in sc:
                ws[k] = flattened_weights(SteeringAngles(e, s),
                                          self.weights, self.cfg)
                k += 1
        vals = np.einsum("ij,jk,ik->i", ws.conj(), self._gram, ws).real
        table = 10.0 * np.log10(vals / (4.0 * np.pi))
        self._table = (et, sc, table.reshape(et.size, sc.size))

    def denominator_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(etilts, scans, tig_db) arrays of the quantized denominator."""
        if self._table is None:
            self._build_table()
        return self._table

    def denominator_db(self, etilt_deg, scan_deg):
        """Quantized-steering denominator, vectorized; nearest table entry."""
        et, sc, table = self.denominator_table()
        ei = np.clip(np.rint(np.asarray(etilt_deg, float)) - et[0],
                     0, et.size - 1).astype(int)
        si = np.clip(np.rint(np.asarray(scan_deg, float)) - sc[0],
                     0, sc.size - 1).astype(int)
        out = table[ei, si]
        if np.ndim(out) == 0:
            return float(out)
        return out


def total_integrated_gain(etilt_deg: float, scan_deg: float,
                          weights: WeightMatrix | None = None,
                          cfg: ArrayConfig = DEFAULT_ARRAY) -> float:
    """Convenience wrapper around :class:`PatternNormalizer` (exact, 0.5 deg)."""
    return PatternNormalizer(weights, cfg).total_integrated_gain(
        etilt_deg, scan_deg)


def element_integrated_gain_db(pattern: ElementPattern = ElementPattern(),
                               step_deg: float = 0.5) -> float:
    """Whole-sphere integral of the bare element pattern, dB (about -2)."""
    theta = np.arange(step_deg / 2.0, 180.0, step_deg)
    phi = np.arange(-180.0 + step_deg / 2.0, 180.0, step_deg)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    d_lin = 10.0 ** (element_gain(tt, pp, pattern) / 10.0)
    val = np.sum(d_lin * np.sin(np.radians(tt))) * math.radians(step_deg) ** 2
    return 10.0 * math.log10(val / (4.0 * math.pi))


def broadside_directivity_loss_db(weights: WeightMatrix,
                                  cfg: ArrayConfig = DEFAULT_ARRAY) -> float:
    """Directivity cost of a taper at broadside steering, dB.

    Directivity is peak gain minus the pattern's own integrated gain;
    the difference uniform-minus-tapered is the taper efficiency loss.
    """
    norm_u = PatternNormalizer(uniform_weights(cfg), cfg)
    norm_t = PatternNormalizer(weights, cfg)
    peak_u = composite_gain(90.0, 0.0, 0.0, 0.0, uniform_weights(cfg), cfg)
    peak_t = composite_gain(90.0, 0.0, 0.0, 0.0, weights, cfg)
    d_u = peak_u - norm_u.total_integrated_gain(0.0, 0.0)
    d_t = peak_t - norm_t.total_integrated_gain(0.0, 0.0)
    return float(d_u - d_t)


def tx_power_spectral_density(cfg: ArrayConfig = DEFAULT_ARRAY,
                              bandwidth_mhz: float = 100.0) -> float:
    """Conducted power spectral density, dB(W/MHz).

    Per-element conducted power plus the shared-spectrum power relaxation,
    summed over both polarizations of every element and spread across the
    channel bandwidth.
    """
    if bandwidth_mhz <= 0.0:
        raise ValueError("bandwidth must be positive")
    n_total = cfg.n_elements * cfg.polarizations
    return (cfg.conducted_power_per_element_dbm + cfg.extra_power_db
            + 10.0 * math.log10(n_total)
            - 10.0 * math.log10(bandwidth_mhz) - 30.0)


@dataclass(frozen=True)
class EirpReport:
    peak_eirp_dbm: float
    per_user_eirp_dbm: float
    trp_dual_dbm: float
    trp_single_dbm: float
    peak_eirp_dbw_per_100mhz: float
    cap_dbw_per_100mhz: float
    exceeds_cap: bool


def eirp_report(cfg: ArrayConfig = DEFAULT_ARRAY,
                channel_bandwidth_mhz: float = 100.0,
                statistical_peak_gain_dbi: float = 22.65,
                users_per_sector: int = 3,
                cap_dbw_per_100mhz: float = 32.0) -> EirpReport:
    """EIRP/TRP bookkeeping plus the regulatory-cap comparison.

    ``statistical_peak_gain_dbi`` is the observed peak of the steered-gain
    distribution toward the horizon (a hair under the boresight figure);
    it enters only the per-user line, where conducted power is split
    across simultaneously served users.
    """
    psd = tx_power_spectral_density(cfg, channel_bandwidth_mhz)
    conducted_dbm = psd + 10.0 * math.log10(channel_bandwidth_mhz) + 30.0
    peak_gain = float(composite_gain(90.0, 0.0, 0.0, 0.0,
                                     uniform_weights(cfg), cfg))
    peak_eirp = conducted_dbm + peak_gain
    per_user = (conducted_dbm - 10.0 * math.log10(users_per_sector)
                + statistical_peak_gain_dbi)
    trp_dual = (cfg.conducted_power_per_element_dbm + cfg.extra_power_db
                + 10.0 * math.log10(cfg.n_elements * cfg.polarizations))
    trp_single = (cfg.conducted_power_per_element_dbm + cfg.extra_power_db
                  + 10.0 * math.log10(cfg.n_elements))
    # cap is expressed per 100 MHz of occupied spectrum
    peak_dbw_100 = (peak_eirp - 30.0
                    + 10.0 * math.log10(min(1.0, 100.0 / channel_bandwidth_mhz)))
    return EirpReport(
        peak_eirp_dbm=peak_eirp,
        per_user_eirp_dbm=per_user,
        trp_dual_dbm=trp_dual,
        trp_single_dbm=trp_single,
        peak_eirp_dbw_per_100mhz=peak_dbw_100,
        cap_dbw_per_100mhz=cap_dbw_per_100mhz,
        exceeds_cap=peak_dbw_100 > cap_dbw_per_100mhz,
    )
