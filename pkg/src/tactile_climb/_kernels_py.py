"""Pure-Python implementation of the chain settling kernels.

Same algorithm and argument order as the compiled ``_kernels`` extension.
The grid scan is vectorised with numpy; the golden-section refinement runs
one pitch at a time. :func:`chain_geometry` is also the geometry the
simulator uses to place the settled chain in the world.
"""
import math

import numpy as np


def ground_height_many(tx, tz, xs):
    return np.interp(np.asarray(xs, dtype=float), tx, tz)


def chain_geometry(theta, lens, com_frac, geom, psi):
    """Chain points relative to the head joint for one or more head pitches.

    Returns a dict of arrays with a leading pitch axis: ``front``/``rear``
    (k, n, 2) axis endpoints, ``outline`` (k, 2n+1, 2) belly polyline,
    ``shoulder`` (k, n, 2), ``com`` (k, n, 2) segment mass centres and
    ``phi`` (k, n) absolute segment pitch.
    """
    belly, _, leg_frac, hook, nrun, nrise = geom[:6]
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    n = len(lens)
    phi = psi[:, None] - np.concatenate(([0.0], np.cumsum(theta)))[None, :n]
    c = np.cos(phi)
    s = np.sin(phi)
    k = len(psi)
    front = np.empty((k, n, 2))
    rear = np.empty((k, n, 2))
    front[:, 0, 0] = lens[0] * c[:, 0]
    front[:, 0, 1] = lens[0] * s[:, 0]
    rear[:, 0] = 0.0
    px = np.zeros(k)
    pz = np.zeros(k)
    for j in range(1, n):
        front[:, j, 0] = px
        front[:, j, 1] = pz
        px = px - lens[j] * c[:, j]
        pz = pz - lens[j] * s[:, j]
        rear[:, j, 0] = px
        rear[:, j, 1] = pz
    down = np.stack((s, -c), axis=-1) * belly
    outline = np.empty((k, 2 * n + 1, 2))
    c0, s0 = c[:, 0], s[:, 0]
    outline[:, 0, 0] = hook * c0 - (nrise - belly) * s0
    outline[:, 0, 1] = hook * s0 + (nrise - belly) * c0
    outline[:, 1, 0] = (hook - nrun) * c0 + belly * s0
    outline[:, 1, 1] = (hook - nrun) * s0 - belly * c0
    outline[:, 2] = down[:, 0]
    outline[:, 3::2] = front[:, 1:] + down[:, 1:]
    outline[:, 4::2] = rear[:, 1:] + down[:, 1:]
    shoulder = rear + leg_frac * (front - rear)
    cf = np.asarray(com_frac, dtype=float)[None, :, None]
    com = rear + cf * (front - rear)
    return dict(front=front, rear=rear, outline=outline, shoulder=shoulder, com=com, phi=phi)


def _offsets(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, psi):
    g = chain_geometry(theta, lens, com_frac, geom, psi)
    if len(geom) < 6:
        raise ValueError("geom needs 6 entries")
    leg_r = geom[1]
    ol = g["outline"]
    req = (np.interp(xh + ol[..., 0], tx, tz) - ol[..., 1]).max(axis=1)
    a = ol[:, :-1]
    b = ol[:, 1:]
    ax = xh + a[..., 0]
    bx = xh + b[..., 0]
    lo = np.minimum(ax, bx)
    hi = np.maximum(ax, bx)
    vx = tx[None, None, :]
    inside = (vx >= lo[..., None]) & (vx <= hi[..., None]) & ((hi - lo) > 1e-12)[..., None]
    if inside.any():
        dx = bx - ax
        safe = np.where(np.abs(dx) > 0.0, dx, 1.0)
        zl = a[..., 1, None] + (vx - ax[..., None]) * ((b[..., 1] - a[..., 1]) / safe)[..., None]
        d = np.where(inside, tz[None, None, :] - zl, -np.inf)
        req = np.maximum(req, d.max(axis=(1, 2)))
    st = np.asarray(stance, dtype=bool)
    if st.any():
        sh = g["shoulder"][:, st]
        toe = np.interp(xh + sh[..., 0], tx, tz) - (sh[..., 1] - leg_r)
        req = np.maximum(req, toe.max(axis=1))
    m = np.asarray(masses, dtype=float)
    com = req + (m * g["com"][..., 1]).sum(axis=1) / m.sum()
    return req, com


def support_offset(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, psi):
    """Lowest non-penetrating vertical offset and resulting COM height for one pitch."""
    z, com = _offsets(theta, lens, masses, com_frac, geom, stance, xh, tx, tz, psi)
    return float(z[0]), float(com[0])


def rest_pose(theta, lens, masses, com_frac, geom, stance, xh, tx, tz,
              psi_lo, psi_hi, ngrid, n_golden, local=False):
    """Head pitch and vertical offset minimising COM height without penetration.

    With ``local`` the search walks downhill from the middle of the window
    and stops in the first basin instead of taking the global minimum.
    """
    if ngrid < 3:
        raise ValueError("ngrid must be >= 3")
    args = (theta, lens, masses, com_frac, geom, stance, xh, tx, tz)
    step = (psi_hi - psi_lo) / (ngrid - 1)
    grid = psi_lo + np.arange(ngrid) * step
    _, coms = _offsets(*args, grid)
    best = int(np.argmin(coms))
    if local:
        best = (ngrid - 1) // 2
        while True:
            left = coms[best - 1] if best > 0 else math.inf
            right = coms[best + 1] if best < ngrid - 1 else math.inf
            if left < coms[best] and left <= right:
                best -= 1
            elif right < coms[best]:
                best += 1
            else:
                break
    best_com = coms[best]

    def f(p):
        return support_offset(*args, p)[1]

    a = psi_lo + max(best - 1, 0) * step
    b = psi_lo + min(best + 1, ngrid - 1) * step
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    cc = b - gr * (b - a)
    dd = a + gr * (b - a)
    fc, fd = f(cc), f(dd)
    for _ in range(n_golden):
        if fc < fd:
            b, dd, fd = dd, cc, fc
            cc = b - gr * (b - a)
            fc = f(cc)
        else:
            a, cc, fc = cc, dd, fd
            dd = a + gr * (b - a)
            fd = f(dd)
    p = 0.5 * (a + b)
    z, com = support_offset(*args, p)
    if not com < best_com:
        p = psi_lo + best * step
        z, com = support_offset(*args, p)
    return p, z, com
