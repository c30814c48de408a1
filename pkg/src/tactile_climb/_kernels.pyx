# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for the chain settling solver.

Mirrors ``_kernels_py`` one-to-one; the pure-Python module is the reference
and is used whenever this extension is not built.

Geometry vector ``geom`` = (belly, leg_radius, leg_frac, hook, nose_run, nose_rise).
The body outline is the polyline hook, chamfer start, head belly at the head
joint, then front and rear belly points of every following segment.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, INFINITY

cnp.import_array()

DEF MAXSEG = 64


cdef inline Py_ssize_t _bisect(const double[::1] tx, Py_ssize_t nv, double x) noexcept nogil:
    # index i with tx[i] <= x < tx[i+1], clamped to [0, nv-2]
    cdef Py_ssize_t lo = 0, hi = nv - 1, mid
    if x <= tx[0]:
        return 0
    if x >= tx[nv - 1]:
        return nv - 2
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if tx[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline double _interp(const double[::1] tx, const double[::1] tz,
                           Py_ssize_t nv, double x) noexcept nogil:
    cdef Py_ssize_t i
    if x <= tx[0]:
        return tz[0]
    if x >= tx[nv - 1]:
        return tz[nv - 1]
    i = _bisect(tx, nv, x)
    return tz[i] + (x - tx[i]) * (tz[i + 1] - tz[i]) / (tx[i + 1] - tx[i])


def ground_height_many(const double[::1] tx, const double[::1] tz, const double[::1] xs):
    cdef Py_ssize_t k, n = xs.shape[0], nv = tx.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for k in range(n):
        o[k] = _interp(tx, tz, nv, xs[k])
    return out


cdef double _offset(const double[::1] theta, const double[::1] lens,
                    const double[::1] masses, const double[::1] com_frac,
                    const double[::1] geom, const unsigned char[::1] stance,
                    double xh, const double[::1] tx, const double[::1] tz,
                    double psi, double* com_z) noexcept nogil:
    cdef Py_ssize_t n = lens.shape[0], nv = tx.shape[0]
    cdef Py_ssize_t s, i, k, i0, i1, m = 0
    cdef double ox[2 * MAXSEG + 2]
    cdef double oz[2 * MAXSEG + 2]
    cdef double belly = geom[0], leg_r = geom[1], leg_frac = geom[2]
    cdef double hook = geom[3], nrun = geom[4], nrise = geom[5]
    cdef double phi = psi, fx, fz, rx, rz, c, sn
    cdef double ax, az, bx, bz, lo, hi, zl, d, req = -INFINITY
    cdef double mz = 0.0, mtot = 0.0, shx, shz
    for s in range(n):
        if s > 0:
            phi = phi - theta[s - 1]
        c = cos(phi)
        sn = sin(phi)
        if s == 0:
            # head: rear at the head joint, front at the nose
            rx = 0.0
            rz = 0.0
            fx = lens[0] * c
            fz = lens[0] * sn
            ox[0] = hook * c - (nrise - belly) * sn
            oz[0] = hook * sn + (nrise - belly) * c
            ox[1] = (hook - nrun) * c + belly * sn
            oz[1] = (hook - nrun) * sn - belly * c
            ox[2] = belly * sn
            oz[2] = -belly * c
            m = 3
        else:
            fx = rx
            fz = rz
            rx = fx - lens[s] * c
            rz = fz - lens[s] * sn
            ox[m] = fx + belly * sn
            oz[m] = fz - belly * c
            ox[m + 1] = rx + belly * sn
            oz[m + 1] = rz - belly * c
            m += 2
        if stance[s]:
            shx = rx + leg_frac * (fx - rx)
            shz = rz + leg_frac * (fz - rz)
            d = _interp(tx, tz, nv, xh + shx) - (shz - leg_r)
            if d > req:
                req = d
        mz += masses[s] * (rz + com_frac[s] * (fz - rz))
        mtot += masses[s]
    for k in range(m):
        d = _interp(tx, tz, nv, xh + ox[k]) - oz[k]
        if d > req:
            req = d
    for k in range(m - 1):
        ax = xh + ox[k]
        az = oz[k]
        bx = xh + ox[k + 1]
        bz = oz[k + 1]
        lo = ax if ax < bx else bx
        hi = bx if ax < bx else ax
        if hi - lo > 1e-12 and lo < tx[nv - 1] and hi > tx[0]:
            i0 = _bisect(tx, nv, lo)
            i1 = _bisect(tx, nv, hi) + 1
            for i in range(i0, i1 + 1):
                if i < nv and tx[i] >= lo and tx[i] <= hi:
                    zl = az + (tx[i] - ax) * (bz - az) / (bx - ax)
                    d = tz[i] - zl
                    if d > req:
                        req = d
    com_z[0] = req + mz / mtot
    return req


def support_offset(const double[::1] theta, const double[::1] lens,
                   const double[::1] masses, const double[::1] com_frac,
                   const double[::1] geom, const unsigned char[::1] stance,
                   double xh, const double[::1] tx, const double[::1] tz, double psi):
    """Lowest non-penetrating vertical offset and resulting COM height for one pitch."""
    cdef double com
    if lens.shape[0] > MAXSEG:
        raise ValueError("too many segments for the compiled kernel")
    if geom.shape[0] < 6:
        raise ValueError("geom needs 6 entries")
    cdef double z = _offset(theta, lens, masses, com_frac, geom, stance,
                            xh, tx, tz, psi, &com)
    return z, com


def rest_pose(const double[::1] theta, const double[::1] lens,
              const double[::1] masses, const double[::1] com_frac,
              const double[::1] geom, const unsigned char[::1] stance,
              double xh, const double[::1] tx, const double[::1] tz,
              double psi_lo, double psi_hi, int ngrid, int n_golden, bint local=False):
    """Head pitch and vertical offset minimising COM height without penetration.

    With ``local`` the search walks downhill from the middle of the window
    and stops in the first basin instead of taking the global minimum.
    """
    cdef int k, best = 0
    cdef double step = (psi_hi - psi_lo) / (ngrid - 1)
    cdef double com, best_com = INFINITY, p, z
    cdef double a, b, cc, dd, fc, fd
    cdef double gr = (sqrt(5.0) - 1.0) / 2.0
    if lens.shape[0] > MAXSEG:
        raise ValueError("too many segments for the compiled kernel")
    if geom.shape[0] < 6:
        raise ValueError("geom needs 6 entries")
    if ngrid < 3:
        raise ValueError("ngrid must be >= 3")
    cdef double[::1] coms = np.empty(ngrid)
    with nogil:
        for k in range(ngrid):
            p = psi_lo + k * step
            _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, p, &coms[k])
            if coms[k] < best_com:
                best_com = coms[k]
                best = k
        if local:
            best = (ngrid - 1) // 2
            while True:
                if best > 0 and coms[best - 1] < coms[best] and (
                        best == ngrid - 1 or coms[best - 1] <= coms[best + 1]):
                    best -= 1
                elif best < ngrid - 1 and coms[best + 1] < coms[best]:
                    best += 1
                else:
                    break
            best_com = coms[best]
        a = psi_lo + (best - 1 if best > 0 else 0) * step
        b = psi_lo + (best + 1 if best < ngrid - 1 else ngrid - 1) * step
        cc = b - gr * (b - a)
        dd = a + gr * (b - a)
        _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, cc, &fc)
        _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, dd, &fd)
        for k in range(n_golden):
            if fc < fd:
                b = dd
                dd = cc
                fd = fc
                cc = b - gr * (b - a)
                _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, cc, &fc)
            else:
                a = cc
                cc = dd
                fc = fd
                dd = a + gr * (b - a)
                _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, dd, &fd)
        p = 0.5 * (a + b)
        z = _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, p, &com)
        if not com < best_com:
            p = psi_lo + best * step
            z = _offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, p, &com)
    return p, z, com
