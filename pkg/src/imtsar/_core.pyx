# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled snapshot kernel.

One C loop over the drawn stations, mirroring the arithmetic of
``imtsar._kernels.entries_python`` term for term: ECEF geometry, panel
frame rotation, separable array factor, receive pattern (table or
parametric), free-space loss, statistical clutter, and the floored power
sum.  Inputs are the pre-drawn arrays, so the random stream is identical
to the NumPy backend's and results differ only by floating-point
rounding (observed below 1e-9 dB).
"""

from libc.math cimport (M_PI, acos, asin, atan2, cos, fabs, log, log1p,
                        log10, pow, rint, sin, sqrt)

import numpy as np

cimport numpy as cnp

from imtsar.sar_antenna import SINC_3DB_SCALE

cnp.import_array()

cdef double SINC_SCALE = SINC_3DB_SCALE
cdef double R_EARTH_KM = 6378.137
cdef double DEG = M_PI / 180.0
cdef double ELEM_PEAK_DBI = 5.5
cdef double ELEM_BW_DEG = 90.0
cdef double ELEM_FLOOR_DB = 30.0
cdef double LOG10_FAC = 10.0 / 2.302585092994045684    # 10/ln(10)


cdef inline double _axis_power(const double[:] taper, double psi) noexcept:
    # |sum_k t_k exp(i pi k psi)| via a unit-phasor recurrence
    cdef double cs = cos(M_PI * psi)
    cdef double sn = sin(M_PI * psi)
    cdef double pr = 1.0, pi = 0.0
    cdef double re = 0.0, im = 0.0
    cdef double tr
    cdef Py_ssize_t k
    for k in range(taper.shape[0]):
        re += taper[k] * pr
        im += taper[k] * pi
        tr = pr * cs - pi * sn
        pi = pr * sn + pi * cs
        pr = tr
    return sqrt(re * re + im * im)


cdef inline double _sinc_cut(double off_deg, double bw_deg,
                             double scale) noexcept:
    cdef double x = scale * off_deg / bw_deg
    if x == 0.0:
        return 1.0
    return fabs(sin(M_PI * x) / (M_PI * x))


cdef inline Py_ssize_t _cell(const double[:] ax, double v) noexcept:
    # lower bilinear cell index after clamping to the table edges
    cdef Py_ssize_t lo = 0, hi = ax.shape[0], mid
    while lo < hi:                    # first index with ax[idx] >= v
        mid = (lo + hi) // 2
        if ax[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    lo -= 1
    if lo < 0:
        lo = 0
    elif lo > ax.shape[0] - 2:
        lo = ax.shape[0] - 2
    return lo


def snapshot_aggregate(const double[:] sat_pos, const double[:] boresight,
                       const double[:] v_axis, const double[:] h_axis,
                       double half_elev_bw, double half_az_bw,
                       double zone_corr, double bs_alt_km,
                       double mech_downtilt_deg, double f_ghz,
                       double entry_power, double noise, double pol,
                       double in_floor,
                       const double[:] v_taper, const double[:] h_taper,
                       const double[:, :] denom,
                       double denom_et0, double denom_sc0,
                       const double[:] tab_v, const double[:] tab_h,
                       const double[:, :] tab_g,
                       double sar_peak, double sar_elev_bw,
                       double sar_az_bw, double sar_floor,
                       const double[:] lon, const double[:] lat,
                       const double[:] bearing, const double[:] etilt,
                       const double[:] scan, const double[:] cl_gauss,
                       const double[:] cl_q):
    """Aggregate I/N of one snapshot, dB; see the module docstring."""
    cdef Py_ssize_t n = lon.shape[0]
    cdef Py_ssize_t nv = v_taper.shape[0], nh = h_taper.shape[0]
    cdef bint have_denom = denom.shape[0] > 0
    cdef bint have_table = tab_g.shape[0] > 0
    cdef double sx = sat_pos[0], sy = sat_pos[1], sz = sat_pos[2]
    cdef double tilt = mech_downtilt_deg * DEG
    cdef double ct = cos(tilt), st = sin(tilt)
    cdef double k1 = 93.0 * pow(f_ghz, 0.175)
    cdef double fspl_const = 92.45 + 20.0 * log10(f_ghz)
    cdef double floor_lin = pow(10.0, in_floor / 10.0)

    cdef double lin_sum = 0.0
    cdef Py_ssize_t i, ei, si
    cdef double lam, phi, r, bx, by, bz, dx, dy, dz, dist
    cdef double ux, uy, uz, ex, ey, ez, en, nx, ny, nz
    cdef double sin_el, elev, az, theta, dphi, cth, sth, cdp
    cdef double cos_tp, theta_p, phi_p, a_h, a_v, atten, g_elem
    cdef double psi_v, psi_h, fv, fh, af, g_tx
    cdef double rx, ry, rz, rn, along, v_off, h_off, g_rx
    cdef double cv, chh, fv_frac, fh_frac, ev, eh
    cdef double angle, cot_a, base, expo, cl, entry

    for i in range(n):
        # spherical-Earth ECEF of the station and look to the satellite
        lam = lon[i] * DEG
        phi = lat[i] * DEG
        r = R_EARTH_KM + bs_alt_km
        bx = r * cos(phi) * cos(lam)
        by = r * cos(phi) * sin(lam)
        bz = r * sin(phi)
        dx = sx - bx
        dy = sy - by
        dz = sz - bz
        dist = sqrt(dx * dx + dy * dy + dz * dz)
        ux = bx / r
        uy = by / r
        uz = bz / r
        en = sqrt(ux * ux + uy * uy)          # |z cross up|
        ex = -uy / en
        ey = ux / en
        ez = 0.0
        nx = uy * ez - uz * ey
        ny = uz * ex - ux * ez
        nz = ux * ey - uy * ex
        sin_el = (dx * ux + dy * uy + dz * uz) / dist
        if sin_el > 1.0:
            sin_el = 1.0
        elif sin_el < -1.0:
            sin_el = -1.0
        elev = asin(sin_el) / DEG
        az = atan2(dx * ex + dy * ey + dz * ez,
                   dx * nx + dy * ny + dz * nz) / DEG

        # panel frame: bearing about the vertical, then mechanical tilt
        theta = (90.0 - elev) * DEG
        dphi = (az - bearing[i]) * DEG
        cth = cos(theta)
        sth = sin(theta)
        cdp = cos(dphi)
        cos_tp = ct * cth + st * sth * cdp
        if cos_tp > 1.0:
            cos_tp = 1.0
        elif cos_tp < -1.0:
            cos_tp = -1.0
        theta_p = acos(cos_tp) / DEG
        phi_p = atan2(sth * sin(dphi), ct * sth * cdp - st * cth) / DEG

        # single-element envelope and separable beamforming factor
        a_h = 12.0 * (phi_p / ELEM_BW_DEG) * (phi_p / ELEM_BW_DEG)
        if a_h > ELEM_FLOOR_DB:
            a_h = ELEM_FLOOR_DB
        a_v = (12.0 * ((theta_p - 90.0) / ELEM_BW_DEG)
               * ((theta_p - 90.0) / ELEM_BW_DEG))
        if a_v > ELEM_FLOOR_DB:
            a_v = ELEM_FLOOR_DB
        atten = a_h + a_v
        if atten > ELEM_FLOOR_DB:
            atten = ELEM_FLOOR_DB
        g_elem = ELEM_PEAK_DBI - atten

        psi_v = cos(theta_p * DEG) + sin(etilt[i] * DEG)
        psi_h = (sin(theta_p * DEG) * sin(phi_p * DEG)
                 - cos(etilt[i] * DEG) * sin(scan[i] * DEG))
        fv = _axis_power(v_taper, psi_v)
        fh = _axis_power(h_taper, psi_h)
        af = (fv * fh) * (fv * fh) / (nv * nh)
        if af < 1e-300:
            af = 1e-300
        g_tx = g_elem + LOG10_FAC * log(af)
        if have_denom:
            ei = <Py_ssize_t>(rint(etilt[i]) - denom_et0)
            if ei < 0:
                ei = 0
            elif ei > denom.shape[0] - 1:
                ei = denom.shape[0] - 1
            si = <Py_ssize_t>(rint(scan[i]) - denom_sc0)
            if si < 0:
                si = 0
            elif si > denom.shape[1] - 1:
                si = denom.shape[1] - 1
            g_tx = g_tx - denom[ei, si]

        # receive gain at the station's off-axis angles
        rx = bx - sx
        ry = by - sy
        rz = bz - sz
        rn = sqrt(rx * rx + ry * ry + rz * rz)
        rx /= rn
        ry /= rn
        rz /= rn
        along = rx * boresight[0] + ry * boresight[1] + rz * boresight[2]
        v_off = atan2(rx * v_axis[0] + ry * v_axis[1] + rz * v_axis[2],
                      along) / DEG
        h_off = atan2(rx * h_axis[0] + ry * h_axis[1] + rz * h_axis[2],
                      along) / DEG
        if have_table:
            cv = v_off
            if cv < tab_v[0]:
                cv = tab_v[0]
            elif cv > tab_v[tab_v.shape[0] - 1]:
                cv = tab_v[tab_v.shape[0] - 1]
            chh = h_off
            if chh < tab_h[0]:
                chh = tab_h[0]
            elif chh > tab_h[tab_h.shape[0] - 1]:
                chh = tab_h[tab_h.shape[0] - 1]
            ei = _cell(tab_v, cv)
            si = _cell(tab_h, chh)
            fv_frac = (cv - tab_v[ei]) / (tab_v[ei + 1] - tab_v[ei])
            fh_frac = (chh - tab_h[si]) / (tab_h[si + 1] - tab_h[si])
            g_rx = ((1.0 - fv_frac) * (1.0 - fh_frac) * tab_g[ei, si]
                    + fv_frac * (1.0 - fh_frac) * tab_g[ei + 1, si]
                    + (1.0 - fv_frac) * fh_frac * tab_g[ei, si + 1]
                    + fv_frac * fh_frac * tab_g[ei + 1, si + 1])
        else:
            ev = _sinc_cut(v_off, sar_elev_bw, SINC_SCALE)
            eh = _sinc_cut(h_off, sar_az_bw, SINC_SCALE)
            if ev < 1e-30:
                ev = 1e-30
            if eh < 1e-30:
                eh = 1e-30
            g_rx = sar_peak + 20.0 * log10(ev) + 20.0 * log10(eh)
            if g_rx < sar_floor:
                g_rx = sar_floor
        ev = v_off / half_elev_bw
        eh = h_off / half_az_bw
        if ev * ev + eh * eh > 1.0:
            g_rx += zone_corr

        # propagation: free space plus the statistical clutter draw
        angle = 0.05 * (1.0 - elev / 90.0) + M_PI * elev / 180.0
        cot_a = cos(angle) / sin(angle)
        base = -k1 * log1p(-cl_q[i]) * cot_a
        expo = 0.5 * (90.0 - elev) / 90.0
        cl = pow(base, expo) - 1.0 - 0.6 * cl_gauss[i]

        entry = (entry_power + g_tx + g_rx
                 - (fspl_const + 20.0 * log10(dist))
                 - cl - noise - pol)
        if entry < in_floor:
            entry = in_floor
        lin_sum += pow(10.0, entry / 10.0)

    if lin_sum <= floor_lin:
        return in_floor
    return 10.0 * log10(lin_sum)
