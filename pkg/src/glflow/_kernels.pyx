# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels for the gradient-flow solver.

Same semantics as _kernels_np (the import-time fallback): 5-point laplacian,
central divergence/gradient pair for the anisotropic term, fused potential
force, face-based/trapezoid energy reduction. Non-periodic boundary lines of
every output are zeroed. Reductions are plain serial loops: fixed order,
deterministic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

POT_ARRAY, POT_POLY, POT_QWELL = 0, 1, 2


cdef inline double _w_of(int kind, double* c, double t) noexcept nogil:
    # t = |u|^2; returns f'(s)/s
    cdef double s
    if kind == 1:
        return c[0] + t * (c[1] + t * c[2])
    # quadratic well
    s = t ** 0.5
    if s <= 0.25:
        return 2.0
    if s >= 0.75:
        return 2.0 * (s - 1.0) / s
    return (1.0 - 2.0 * s) / s


cdef inline double _f_of(int kind, double* c, double t) noexcept nogil:
    cdef double s
    if kind == 1:
        return t * (c[3] + t * (c[4] + t * c[5]))
    s = t ** 0.5
    if s <= 0.25:
        return s * s
    if s >= 0.75:
        return (s - 1.0) * (s - 1.0)
    return 1.0 / 16.0 + (s - 0.25) * (0.75 - s)


cdef void _divergence(double[:, ::1] u1, double[:, ::1] u2, double[:, ::1] dv,
                      double h, bint per_x, bint per_y) noexcept nogil:
    cdef Py_ssize_t ny = u1.shape[0], nx = u1.shape[1]
    cdef Py_ssize_t iy, ix, iyp, iym, ixp, ixm
    cdef Py_ssize_t y0 = 0 if per_y else 1, y1 = ny if per_y else ny - 1
    cdef Py_ssize_t x0 = 0 if per_x else 1, x1 = nx if per_x else nx - 1
    cdef double inv2h = 1.0 / (2.0 * h)
    for iy in range(y0, y1):
        iyp = iy + 1
        if iyp == ny: iyp = 0
        iym = iy - 1
        if iym < 0: iym = ny - 1
        for ix in range(x0, x1):
            ixp = ix + 1
            if ixp == nx: ixp = 0
            ixm = ix - 1
            if ixm < 0: ixm = nx - 1
            dv[iy, ix] = (u1[iy, ixp] - u1[iy, ixm] + u2[iyp, ix] - u2[iym, ix]) * inv2h


def force(u1_in, u2_in, double h, double mu, double inv_eps2,
          int pot_kind, coefs, bint per_x, bint per_y, warr=None):
    cdef double[:, ::1] u1 = u1_in, u2 = u2_in
    cdef Py_ssize_t ny = u1.shape[0], nx = u1.shape[1]
    out1 = np.zeros((ny, nx)); out2 = np.zeros((ny, nx))
    cdef double[:, ::1] f1 = out1, f2 = out2
    cdef double[:, ::1] wv
    cdef double[:, ::1] dv
    cdef double cbuf[6]
    cdef int k
    cdef bint use_arr = (pot_kind == 0)
    if use_arr:
        wv = np.ascontiguousarray(warr, dtype=np.float64)
    else:
        for k in range(6):
            cbuf[k] = coefs[k]
    cdef bint has_mu = (mu != 0.0)
    dv_arr = np.zeros((ny, nx)) if has_mu else None
    if has_mu:
        dv = dv_arr
        _divergence(u1, u2, dv, h, per_x, per_y)

    cdef Py_ssize_t iy, ix, iyp, iym, ixp, ixm
    cdef Py_ssize_t y0 = 0 if per_y else 1, y1 = ny if per_y else ny - 1
    cdef Py_ssize_t x0 = 0 if per_x else 1, x1 = nx if per_x else nx - 1
    cdef double invh2 = 1.0 / (h * h), inv2h = 1.0 / (2.0 * h)
    cdef double a, b, w, t
    with nogil:
        for iy in range(y0, y1):
            iyp = iy + 1
            if iyp == ny: iyp = 0
            iym = iy - 1
            if iym < 0: iym = ny - 1
            for ix in range(x0, x1):
                ixp = ix + 1
                if ixp == nx: ixp = 0
                ixm = ix - 1
                if ixm < 0: ixm = nx - 1
                a = (u1[iy, ixp] + u1[iy, ixm] + u1[iyp, ix] + u1[iym, ix] - 4.0 * u1[iy, ix]) * invh2
                b = (u2[iy, ixp] + u2[iy, ixm] + u2[iyp, ix] + u2[iym, ix] - 4.0 * u2[iy, ix]) * invh2
                if has_mu:
                    a = a + mu * (dv[iy, ixp] - dv[iy, ixm]) * inv2h
                    b = b + mu * (dv[iyp, ix] - dv[iym, ix]) * inv2h
                if use_arr:
                    w = wv[iy, ix] * inv_eps2
                else:
                    t = u1[iy, ix] * u1[iy, ix] + u2[iy, ix] * u2[iy, ix]
                    w = _w_of(pot_kind, cbuf, t) * inv_eps2
                f1[iy, ix] = a - w * u1[iy, ix]
                f2[iy, ix] = b - w * u2[iy, ix]
    return out1, out2


def energy_parts(u1_in, u2_in, double h, double mu,
                 int pot_kind, coefs, bint per_x, bint per_y, farr=None):
    cdef double[:, ::1] u1 = u1_in, u2 = u2_in
    cdef Py_ssize_t ny = u1.shape[0], nx = u1.shape[1]
    cdef double[:, ::1] fv
    cdef double cbuf[6]
    cdef int k
    cdef bint use_arr = (pot_kind == 0)
    if use_arr:
        fv = np.ascontiguousarray(farr, dtype=np.float64)
    else:
        for k in range(6):
            cbuf[k] = coefs[k]
    cdef Py_ssize_t iy, ix, ixp, iyp, iym, ixm
    cdef double grad_en = 0.0, div2 = 0.0, f_int = 0.0
    cdef double d, wxv, wyv, t
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef Py_ssize_t y0 = 0 if per_y else 1, y1 = ny if per_y else ny - 1
    cdef Py_ssize_t x0 = 0 if per_x else 1, x1 = nx if per_x else nx - 1
    with nogil:
        # x-faces, transverse trapezoid weight in y
        for iy in range(ny):
            wyv = 1.0
            if not per_y and (iy == 0 or iy == ny - 1):
                wyv = 0.5
            for ix in range(nx if per_x else nx - 1):
                ixp = ix + 1
                if ixp == nx: ixp = 0
                d = u1[iy, ixp] - u1[iy, ix]
                grad_en += d * d * wyv
                d = u2[iy, ixp] - u2[iy, ix]
                grad_en += d * d * wyv
        # y-faces
        for iy in range(ny if per_y else ny - 1):
            iyp = iy + 1
            if iyp == ny: iyp = 0
            for ix in range(nx):
                wxv = 1.0
                if not per_x and (ix == 0 or ix == nx - 1):
                    wxv = 0.5
                d = u1[iyp, ix] - u1[iy, ix]
                grad_en += d * d * wxv
                d = u2[iyp, ix] - u2[iy, ix]
                grad_en += d * d * wxv
        # divergence squared, interior of non-periodic axes
        for iy in range(y0, y1):
            iyp = iy + 1
            if iyp == ny: iyp = 0
            iym = iy - 1
            if iym < 0: iym = ny - 1
            for ix in range(x0, x1):
                ixp = ix + 1
                if ixp == nx: ixp = 0
                ixm = ix - 1
                if ixm < 0: ixm = nx - 1
                d = (u1[iy, ixp] - u1[iy, ixm] + u2[iyp, ix] - u2[iym, ix]) * inv2h
                div2 += d * d
        # potential with trapezoid weights
        for iy in range(ny):
            wyv = 1.0
            if not per_y and (iy == 0 or iy == ny - 1):
                wyv = 0.5
            for ix in range(nx):
                wxv = 1.0
                if not per_x and (ix == 0 or ix == nx - 1):
                    wxv = 0.5
                if use_arr:
                    f_int += fv[iy, ix] * wxv * wyv
                else:
                    t = u1[iy, ix] * u1[iy, ix] + u2[iy, ix] * u2[iy, ix]
                    f_int += _f_of(pot_kind, cbuf, t) * wxv * wyv
    return grad_en, div2 * h * h, f_int * h * h


cdef void _fill_ghosts(double[:, ::1] P, bint per_x, bint per_y) noexcept nogil:
    # padded array (ny+2, nx+2); periodic axes wrap through the ghost ring,
    # non-periodic ghosts are never read (boundary outputs are skipped)
    cdef Py_ssize_t nyp = P.shape[0], nxp = P.shape[1]
    cdef Py_ssize_t i
    if per_x:
        for i in range(nyp):
            P[i, 0] = P[i, nxp - 2]
            P[i, nxp - 1] = P[i, 1]
    if per_y:
        for i in range(nxp):
            P[0, i] = P[nyp - 2, i]
            P[nyp - 1, i] = P[1, i]


cdef void _force_padded(double[:, ::1] P1, double[:, ::1] P2,
                        double[:, ::1] f1, double[:, ::1] f2, double[:, ::1] D,
                        double h, double mu, double inv_eps2,
                        int pot_kind, double* cbuf,
                        Py_ssize_t ys, Py_ssize_t ye, Py_ssize_t xs, Py_ssize_t xe,
                        bint per_x, bint per_y) noexcept nogil:
    """Force from padded inputs into unpadded (ny, nx) outputs (offset -1).
    D is padded divergence scratch."""
    cdef Py_ssize_t jy, jx
    cdef double invh2 = 1.0 / (h * h), inv2h = 1.0 / (2.0 * h)
    cdef double a, b, w, t
    cdef bint has_mu = (mu != 0.0)
    if has_mu:
        for jy in range(ys, ye):
            for jx in range(xs, xe):
                D[jy, jx] = (P1[jy, jx + 1] - P1[jy, jx - 1]
                             + P2[jy + 1, jx] - P2[jy - 1, jx]) * inv2h
        _fill_ghosts(D, per_x, per_y)
    for jy in range(ys, ye):
        for jx in range(xs, xe):
            a = (P1[jy, jx + 1] + P1[jy, jx - 1] + P1[jy + 1, jx] + P1[jy - 1, jx]
                 - 4.0 * P1[jy, jx]) * invh2
            b = (P2[jy, jx + 1] + P2[jy, jx - 1] + P2[jy + 1, jx] + P2[jy - 1, jx]
                 - 4.0 * P2[jy, jx]) * invh2
            if has_mu:
                a = a + mu * (D[jy, jx + 1] - D[jy, jx - 1]) * inv2h
                b = b + mu * (D[jy + 1, jx] - D[jy - 1, jx]) * inv2h
            t = P1[jy, jx] * P1[jy, jx] + P2[jy, jx] * P2[jy, jx]
            w = _w_of(pot_kind, cbuf, t) * inv_eps2
            f1[jy - 1, jx - 1] = a - w * P1[jy, jx]
            f2[jy - 1, jx - 1] = b - w * P2[jy, jx]


def heun(u1_in, u2_in, double h, double mu, double inv_eps2, double dt,
         int pot_kind, coefs, bint per_x, bint per_y):
    """Two-stage explicit step fused in C; boundary lines carry over from
    the input. Only the analytic potential families are supported here (the
    solver falls back to composed force calls otherwise)."""
    cdef double[:, ::1] u1 = u1_in, u2 = u2_in
    cdef Py_ssize_t ny = u1.shape[0], nx = u1.shape[1]
    out = np.empty((2, ny, nx))
    out[0] = u1_in
    out[1] = u2_in
    cdef double[:, ::1] o1 = out[0], o2 = out[1]
    P1_arr = np.zeros((ny + 2, nx + 2)); P2_arr = np.zeros((ny + 2, nx + 2))
    D_arr = np.zeros((ny + 2, nx + 2)) if mu != 0.0 else np.zeros((1, 1))
    k1a_arr = np.zeros((ny, nx)); k1b_arr = np.zeros((ny, nx))
    k2a_arr = np.zeros((ny, nx)); k2b_arr = np.zeros((ny, nx))
    cdef double[:, ::1] P1 = P1_arr, P2 = P2_arr, D = D_arr
    cdef double[:, ::1] k1a = k1a_arr, k1b = k1b_arr, k2a = k2a_arr, k2b = k2b_arr
    cdef double cbuf[6]
    cdef int k
    for k in range(6):
        cbuf[k] = coefs[k]
    # output range in padded coordinates: skip boundary lines on
    # non-periodic axes (their forces are zero by convention)
    cdef Py_ssize_t ys = 1 if per_y else 2, ye = ny + 1 if per_y else ny
    cdef Py_ssize_t xs = 1 if per_x else 2, xe = nx + 1 if per_x else nx
    cdef Py_ssize_t jy, jx
    with nogil:
        for jy in range(ny):
            for jx in range(nx):
                P1[jy + 1, jx + 1] = u1[jy, jx]
                P2[jy + 1, jx + 1] = u2[jy, jx]
        _fill_ghosts(P1, per_x, per_y)
        _fill_ghosts(P2, per_x, per_y)
        _force_padded(P1, P2, k1a, k1b, D, h, mu, inv_eps2, pot_kind, cbuf,
                      ys, ye, xs, xe, per_x, per_y)
        for jy in range(ys, ye):
            for jx in range(xs, xe):
                P1[jy, jx] = u1[jy - 1, jx - 1] + dt * k1a[jy - 1, jx - 1]
                P2[jy, jx] = u2[jy - 1, jx - 1] + dt * k1b[jy - 1, jx - 1]
        _fill_ghosts(P1, per_x, per_y)
        _fill_ghosts(P2, per_x, per_y)
        _force_padded(P1, P2, k2a, k2b, D, h, mu, inv_eps2, pot_kind, cbuf,
                      ys, ye, xs, xe, per_x, per_y)
        for jy in range(ys, ye):
            for jx in range(xs, xe):
                o1[jy - 1, jx - 1] = u1[jy - 1, jx - 1] \
                    + 0.5 * dt * (k1a[jy - 1, jx - 1] + k2a[jy - 1, jx - 1])
                o2[jy - 1, jx - 1] = u2[jy - 1, jx - 1] \
                    + 0.5 * dt * (k1b[jy - 1, jx - 1] + k2b[jy - 1, jx - 1])
    return out


def imex_apply(u1_in, u2_in, double h, double mu, double dt, double shift,
               bint per_x, bint per_y):
    cdef double[:, ::1] u1 = u1_in, u2 = u2_in
    cdef Py_ssize_t ny = u1.shape[0], nx = u1.shape[1]
    out1 = np.zeros((ny, nx)); out2 = np.zeros((ny, nx))
    cdef double[:, ::1] y1v = out1, y2v = out2
    cdef double[:, ::1] dv
    cdef bint has_mu = (mu != 0.0)
    dv_arr = np.zeros((ny, nx)) if has_mu else None
    if has_mu:
        dv = dv_arr
        _divergence(u1, u2, dv, h, per_x, per_y)
    cdef Py_ssize_t iy, ix, iyp, iym, ixp, ixm
    cdef Py_ssize_t y0 = 0 if per_y else 1, yl = ny if per_y else ny - 1
    cdef Py_ssize_t x0 = 0 if per_x else 1, xl = nx if per_x else nx - 1
    cdef double invh2 = 1.0 / (h * h), inv2h = 1.0 / (2.0 * h)
    cdef double a, b
    with nogil:
        for iy in range(y0, yl):
            iyp = iy + 1
            if iyp == ny: iyp = 0
            iym = iy - 1
            if iym < 0: iym = ny - 1
            for ix in range(x0, xl):
                ixp = ix + 1
                if ixp == nx: ixp = 0
                ixm = ix - 1
                if ixm < 0: ixm = nx - 1
                a = (u1[iy, ixp] + u1[iy, ixm] + u1[iyp, ix] + u1[iym, ix] - 4.0 * u1[iy, ix]) * invh2
                b = (u2[iy, ixp] + u2[iy, ixm] + u2[iyp, ix] + u2[iym, ix] - 4.0 * u2[iy, ix]) * invh2
                if has_mu:
                    a = a + mu * (dv[iy, ixp] - dv[iy, ixm]) * inv2h
                    b = b + mu * (dv[iyp, ix] - dv[iym, ix]) * inv2h
                y1v[iy, ix] = (1.0 + shift) * u1[iy, ix] - dt * a
                y2v[iy, ix] = (1.0 + shift) * u2[iy, ix] - dt * b
    return out1, out2
