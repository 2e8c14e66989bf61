"""Pure-numpy implementation of the solver hot kernels.

Mirrors the compiled extension (`_kernels.pyx`): same stencils, same
boundary conventions (non-periodic boundary lines of every output are
zeroed; the solver pins those state entries separately).

Potential dispatch: ``pot_kind`` 0 uses caller-supplied nodal arrays,
1 is a cubic-in-|u|^2 polynomial family (w(t) = c0 + c1 t + c2 t^2,
f(t) = d0 t + d1 t^2 + d2 t^3 with t = |u|^2), 2 is the piecewise
quadratic-well family.
"""

from __future__ import annotations

import numpy as np

from .fields import _shift

POT_ARRAY, POT_POLY, POT_QWELL = 0, 1, 2


def _dx(a, h, per_x):
    d = (_shift(a, 1, 1, per_x) - _shift(a, 1, -1, per_x)) / (2 * h)
    if not per_x:
        d[:, 0] = d[:, -1] = 0.0
    return d


def _dy(a, h, per_y):
    d = (_shift(a, 0, 1, per_y) - _shift(a, 0, -1, per_y)) / (2 * h)
    if not per_y:
        d[0, :] = d[-1, :] = 0.0
    return d


def _lap(a, h, per_x, per_y):
    out = (
        _shift(a, 1, 1, per_x)
        + _shift(a, 1, -1, per_x)
        + _shift(a, 0, 1, per_y)
        + _shift(a, 0, -1, per_y)
        - 4.0 * a
    ) / (h * h)
    if not per_x:
        out[:, 0] = out[:, -1] = 0.0
    if not per_y:
        out[0, :] = out[-1, :] = 0.0
    return out


def _zero_boundary(a, per_x, per_y):
    if not per_x:
        a[:, 0] = a[:, -1] = 0.0
    if not per_y:
        a[0, :] = a[-1, :] = 0.0
    return a


def w_values(u1, u2, pot_kind, coefs, warr=None):
    """Force factor w(|u|) = f'(|u|)/|u|, evaluated nodewise."""
    if pot_kind == POT_ARRAY:
        return warr
    t = u1 * u1 + u2 * u2
    if pot_kind == POT_POLY:
        c0, c1, c2 = coefs[:3]
        return c0 + t * (c1 + t * c2)
    if pot_kind == POT_QWELL:
        s = np.sqrt(t)
        w = np.full_like(s, 2.0)
        mid = (s > 0.25) & (s < 0.75)
        hi = s >= 0.75
        with np.errstate(divide="ignore", invalid="ignore"):
            w[mid] = (1.0 - 2.0 * s[mid]) / s[mid]
            w[hi] = 2.0 * (s[hi] - 1.0) / s[hi]
        return w
    raise ValueError(f"unknown pot_kind {pot_kind}")


def f_values(u1, u2, pot_kind, coefs, farr=None):
    """Potential density F(u) = f(|u|), evaluated nodewise."""
    if pot_kind == POT_ARRAY:
        return farr
    t = u1 * u1 + u2 * u2
    if pot_kind == POT_POLY:
        d0, d1, d2 = coefs[3:6]
        return t * (d0 + t * (d1 + t * d2))
    if pot_kind == POT_QWELL:
        s = np.sqrt(t)
        return np.where(
            s <= 0.25,
            s * s,
            np.where(s >= 0.75, (s - 1.0) ** 2, 1.0 / 16.0 + (s - 0.25) * (0.75 - s)),
        )
    raise ValueError(f"unknown pot_kind {pot_kind}")


def force(u1, u2, h, mu, inv_eps2, pot_kind, coefs, per_x, per_y, warr=None):
    """mu grad(div u) + lap u - inv_eps2 * w(|u|) u, boundary lines zeroed."""
    f1 = _lap(u1, h, per_x, per_y)
    f2 = _lap(u2, h, per_x, per_y)
    if mu != 0.0:
        dv = _dx(u1, h, per_x) + _dy(u2, h, per_y)
        _zero_boundary(dv, per_x, per_y)
        f1 += mu * _dx(dv, h, per_x)
        f2 += mu * _dy(dv, h, per_y)
    w = w_values(u1, u2, pot_kind, coefs, warr) * inv_eps2
    f1 -= w * u1
    f2 -= w * u2
    _zero_boundary(f1, per_x, per_y)
    _zero_boundary(f2, per_x, per_y)
    return f1, f2


def energy_parts(u1, u2, h, mu, pot_kind, coefs, per_x, per_y, farr=None):
    """(face gradient energy, integral of (div u)^2, integral of F(u)).

    The face energy matches fields.grad_energy; the divergence integral uses
    plain h^2 weights (the divergence vanishes on non-periodic boundary
    lines, so trapezoid and plain weights agree); F uses trapezoid weights.
    """
    wx = np.ones(u1.shape[1])
    wy = np.ones(u1.shape[0])
    if not per_x:
        wx[0] = wx[-1] = 0.5
    if not per_y:
        wy[0] = wy[-1] = 0.5
    grad_en = 0.0
    for a in (u1, u2):
        if per_x:
            dxa = np.roll(a, -1, axis=1) - a
        else:
            dxa = a[:, 1:] - a[:, :-1]
        grad_en += np.sum(dxa * dxa * wy[:, None])
        if per_y:
            dya = np.roll(a, -1, axis=0) - a
        else:
            dya = a[1:, :] - a[:-1, :]
        grad_en += np.sum(dya * dya * wx[None, :])
    dv = _dx(u1, h, per_x) + _dy(u2, h, per_y)
    _zero_boundary(dv, per_x, per_y)
    div2 = float(np.sum(dv * dv)) * h * h
    fv = f_values(u1, u2, pot_kind, coefs, farr)
    f_int = float(np.sum(fv * np.outer(wy, wx))) * h * h
    return float(grad_en), div2, f_int


def heun(u1, u2, h, mu, inv_eps2, dt, pot_kind, coefs, per_x, per_y):
    """Two-stage explicit step, returned as one (2, ny, nx) array; boundary
    lines carry over from the input (stage forces vanish there)."""
    k1a, k1b = force(u1, u2, h, mu, inv_eps2, pot_kind, coefs, per_x, per_y)
    v1 = u1 + dt * k1a
    v2 = u2 + dt * k1b
    k2a, k2b = force(v1, v2, h, mu, inv_eps2, pot_kind, coefs, per_x, per_y)
    return np.stack([u1 + 0.5 * dt * (k1a + k2a), u2 + 0.5 * dt * (k1b + k2b)])


def imex_apply(u1, u2, h, mu, dt, shift, per_x, per_y):
    """(1 + shift) u - dt (lap u + mu grad div u), boundary lines zeroed."""
    l1 = _lap(u1, h, per_x, per_y)
    l2 = _lap(u2, h, per_x, per_y)
    if mu != 0.0:
        dv = _dx(u1, h, per_x) + _dy(u2, h, per_y)
        _zero_boundary(dv, per_x, per_y)
        l1 += mu * _dx(dv, h, per_x)
        l2 += mu * _dy(dv, h, per_y)
    y1 = (1.0 + shift) * u1 - dt * l1
    y2 = (1.0 + shift) * u2 - dt * l2
    _zero_boundary(y1, per_x, per_y)
    _zero_boundary(y2, per_x, per_y)
    return y1, y2
