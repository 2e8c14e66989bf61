"""Double-equal-well potential families and the traveling-wave profile.

A potential is described by the radial profile f(s) of the density
F(u) = f(|u|) = g(|u|)^2 / 2, with wells at s = 0 and s = 1. Two families
are built in:

* ``csh_potential``: g(s) = s|s^2-1| (mass 1/4), or scaled by 4 so that the
  normalized variant has mass 1 and F(u) = 8|u|^2 (1-|u|^2)^2.
* ``quadratic_well_potential``: f = s^2 below 1/4, (s-1)^2 above 3/4, and a
  C^{1,1} quadratic bridge 1/16 + (s-1/4)(3/4-s) in between (>= 1/16 there).

``dist`` tabulates the antiderivative of g on [0, 3] (cubic Hermite with the
exact slopes, so its derivative recovers g and vanishes at 0) and switches to
the family's analytic tail integral beyond; ``mass`` is dist(1). Diagnostics
that need level thresholds scale them with ``mass`` instead of assuming the
normalized family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .kernels import POT_ARRAY, POT_POLY, POT_QWELL

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _cumulative_gauss(g, xs):
    """Cumulative integral of g at the nodes xs, 5-point Gauss per panel."""
    lo, hi = xs[:-1], xs[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    vals = np.zeros_like(lo)
    for node, wt in zip(_GL_NODES, _GL_WEIGHTS):
        vals += wt * g(mid + half * node)
    panel = vals * half
    out = np.empty_like(xs)
    out[0] = 0.0
    np.cumsum(panel, out=out[1:])
    return out


@dataclass
class BulkPotential:
    """Radial double-well potential with derived quantities."""

    name: str
    f: Callable
    fprime: Callable
    g: Callable
    normalized: bool = False
    s0: float | None = None
    fprime2: Callable | None = None
    breakpoints: tuple[float, ...] = ()
    tail: Callable | None = None            # exact integral of g from dist_cap
    pot_kind: int = POT_ARRAY
    pot_coefs: tuple[float, ...] = (0.0,) * 6
    dist_cap: float = 3.0
    mass: float = field(init=False)
    c0: float = field(init=False)
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        xs = np.linspace(0.0, self.dist_cap, 4096)
        xs = np.unique(np.concatenate([xs, np.asarray(self.breakpoints, dtype=float)]))
        tab = _cumulative_gauss(self.g, xs)
        self._spline = CubicHermiteSpline(xs, tab, self.g(xs))
        self._dist_at_cap = float(tab[-1])
        self.mass = float(self.dist(1.0))
        s = np.linspace(2.0, 4.0, 2001)
        self.c0 = float(np.min(np.sqrt(self.f(s) / (2.0 * s * s))))

    def F(self, u1, u2=None):
        """Potential density from vector components (or amplitude if u2 is None)."""
        if u2 is None:
            return self.f(np.abs(u1))
        return self.f(np.hypot(u1, u2))

    def dist(self, s):
        """Antiderivative of g from 0 (monotone; equals mass at s=1)."""
        s = np.asarray(s, dtype=float)
        out = np.where(
            s <= self.dist_cap,
            self._spline(np.clip(s, 0.0, self.dist_cap)),
            self._dist_at_cap + (self.tail(s) if self.tail is not None else self._num_tail(s)),
        )
        return out if out.ndim else float(out)

    def _num_tail(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros_like(s_arr)
        for i, si in enumerate(s_arr):
            if si > self.dist_cap:
                xs = np.linspace(self.dist_cap, si, 64)
                out[i] = _cumulative_gauss(self.g, xs)[-1]
        return out.reshape(np.shape(s))

    def dist_deriv(self, s):
        return self.g(s)

    def psi_target(self) -> float:
        """Value the phase indicator approaches in the bulk phase."""
        return self.mass

    def force_factor(self, s):
        """w(s) = f'(s)/s, finite at 0 (both wells have f'(0) = 0)."""
        s = np.asarray(s, dtype=float)
        tiny = s < 1e-12
        safe = np.where(tiny, 1.0, s)
        w = self.fprime(safe) / safe
        if np.any(tiny):
            w = np.where(tiny, self._w0(), w)
        return w

    def _w0(self) -> float:
        ds = 1e-6
        return self.fprime(ds) / ds

    def fpp_max(self, lo: float = 0.0, hi: float = 1.5) -> float:
        """max |f''| on [lo, hi]; stabilization constant for the solver."""
        s = np.linspace(lo, hi, 4001)
        if self.fprime2 is not None:
            return float(np.max(np.abs(self.fprime2(s))))
        ds = 1e-5
        return float(np.max(np.abs(self.fprime(s + ds) - self.fprime(s - ds)) / (2 * ds)))


def csh_potential(normalized: bool = True) -> BulkPotential:
    """Sextic equal-well family; normalized variant scales g by 4 (mass 1)."""
    a = 4.0 if normalized else 1.0

    def g(s):
        s = np.asarray(s, dtype=float)
        return a * np.abs(s) * np.abs(s * s - 1.0)

    def f(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * a * a * s * s * (s * s - 1.0) ** 2

    def fprime(s):
        s = np.asarray(s, dtype=float)
        return a * a * (s - 4.0 * s**3 + 3.0 * s**5)

    def fprime2(s):
        s = np.asarray(s, dtype=float)
        return a * a * (1.0 - 12.0 * s * s + 15.0 * s**4)

    def tail(s):
        # integral of g on [3, s] for s > 3 (g = a t (t^2-1) there)
        s = np.asarray(s, dtype=float)
        prim = lambda t: a * (t**4 / 4.0 - t * t / 2.0)
        return prim(s) - prim(3.0)

    c = a * a
    return BulkPotential(
        name="csh" + ("_normalized" if normalized else ""),
        f=f,
        fprime=fprime,
        g=g,
        fprime2=fprime2,
        normalized=normalized,
        s0=1.0 / np.sqrt(3.0),
        breakpoints=(1.0,),
        tail=tail,
        pot_kind=POT_POLY,
        pot_coefs=(c, -4.0 * c, 3.0 * c, 0.5 * c, -c, 0.5 * c),
    )


def quadratic_well_potential() -> BulkPotential:
    """Piecewise-quadratic equal wells with a C^{1,1} bridge; not normalized."""

    def f(s):
        s = np.asarray(s, dtype=float)
        return np.where(
            s <= 0.25,
            s * s,
            np.where(s >= 0.75, (s - 1.0) ** 2, 1.0 / 16.0 + (s - 0.25) * (0.75 - s)),
        )

    def fprime(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 0.25, 2.0 * s, np.where(s >= 0.75, 2.0 * (s - 1.0), 1.0 - 2.0 * s))

    def fprime2(s):
        s = np.asarray(s, dtype=float)
        return np.where((s > 0.25) & (s < 0.75), -2.0, 2.0)

    def g(s):
        return np.sqrt(2.0 * f(s))

    def tail(s):
        s = np.asarray(s, dtype=float)
        prim = lambda t: np.sqrt(2.0) * (t - 1.0) ** 2 / 2.0
        return prim(s) - prim(3.0)

    return BulkPotential(
        name="quadratic_well",
        f=f,
        fprime=fprime,
        g=g,
        fprime2=fprime2,
        normalized=False,
        s0=0.5,
        breakpoints=(0.25, 0.75),
        tail=tail,
        pot_kind=POT_QWELL,
    )


def potential_from_g(g, name: str = "custom") -> BulkPotential:
    """Fixture builder: derive f = g^2/2 (numeric derivatives); used by the
    validator tests to construct deliberately broken potentials."""

    def f(s):
        return 0.5 * np.asarray(g(s)) ** 2

    def fprime(s):
        ds = 1e-6
        return (f(np.asarray(s) + ds) - f(np.asarray(s) - ds)) / (2 * ds)

    return BulkPotential(name=name, f=f, fprime=fprime, g=g)


# ---------------------------------------------------------------------------
# structural validation


@dataclass
class Clause:
    name: str
    passed: bool
    detail: str
    informational: bool = False


@dataclass
class ValidationReport:
    clauses: list[Clause]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses if not c.informational)

    def __getitem__(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_assumptions(p: BulkPotential) -> ValidationReport:
    """Numerically check the structural well assumptions; each violated
    clause is reported individually. The literal growth reading (s >= 1) is
    unsatisfiable for equal wells (f(1) = 0) and reported informationally;
    the operative check uses s >= 2."""
    clauses = []
    s = np.linspace(0.0, 2.5, 2501)
    gv = np.asarray(p.g(s), dtype=float)
    lip = float(np.max(np.abs(np.diff(gv) / np.diff(s))))
    clauses.append(
        Clause("g_nonneg_lipschitz", bool(np.all(gv >= -1e-12) and np.isfinite(lip)),
               f"min g = {gv.min():.3e}, Lipschitz estimate {lip:.3g}")
    )
    g0, g1 = float(p.g(0.0)), float(p.g(1.0))
    clauses.append(Clause("g_zeros", abs(g0) <= 1e-12 and abs(g1) <= 1e-12,
                          f"g(0) = {g0:.3e}, g(1) = {g1:.3e}"))
    mask = (s > 1e-3) & (np.abs(s - 1.0) > 1e-3)
    fv = np.asarray(p.f(s), dtype=float)
    clauses.append(Clause("f_positive_off_wells", bool(np.all(fv[mask] > 0)),
                          f"min f off wells = {fv[mask].min():.3e}"))
    si = np.linspace(1e-4, 1.0 - 1e-4, 4001)
    fp = np.asarray(p.fprime(si), dtype=float)
    signs = np.sign(fp)
    changes = np.nonzero(np.diff(signs) != 0)[0]
    one_change = len(changes) == 1 and fp[0] > 0 and fp[-1] < 0
    s0_est = float(si[changes[0]]) if len(changes) else float("nan")
    clauses.append(Clause("fprime_single_sign_change", bool(one_change),
                          f"sign changes at {s0_est:.4f}" if one_change
                          else f"{len(changes)} sign changes"))
    ds = 1e-5
    fp0, fp1 = float(p.fprime(0.0)), float(p.fprime(1.0))
    if p.fprime2 is not None:
        fpp0, fpp1 = float(p.fprime2(0.0)), float(p.fprime2(1.0))
    else:
        fpp0 = float((p.fprime(2 * ds) - p.fprime(0.0)) / (2 * ds))
        fpp1 = float((p.fprime(1.0 + ds) - p.fprime(1.0 - ds)) / (2 * ds))
    clauses.append(Clause("wells_nondegenerate",
                          abs(fp0) <= 1e-9 and abs(fp1) <= 1e-9 and fpp0 > 0 and fpp1 > 0,
                          f"f'(0)={fp0:.2e}, f'(1)={fp1:.2e}, f''(0)={fpp0:.3g}, f''(1)={fpp1:.3g}"))
    sg = np.linspace(2.0, 6.0, 4001)
    ok_growth = p.c0 > 0 and bool(np.all(p.f(sg) >= 2.0 * p.c0**2 * sg * sg * (1.0 - 1e-12)))
    clauses.append(Clause("growth_from_two", ok_growth, f"c0 = {p.c0:.6g}"))
    clauses.append(Clause("growth_literal_from_one", False,
                          "f(1) = 0 rules out f >= 2 c0^2 s^2 on s >= 1; the s >= 2 reading is checked instead",
                          informational=True))
    return ValidationReport(clauses)


# ---------------------------------------------------------------------------
# traveling wave


class ProfileError(RuntimeError):
    pass


@dataclass
class TravelingWaveProfile:
    """Monotone heteroclinic amplitude profile theta(z), theta' = g(theta).

    Values below 1e-8 (above 1 - 1e-8) evaluate to exactly 0 (1) so that
    compositions far from the interface are exact; this is the tail
    extension past the sampled window [-Z, Z] as well.
    """

    z: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    pin: float
    Z: float
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    TAIL = 1e-8

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.z, self.theta, self.dtheta)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        v = self._spline(np.clip(z, -self.Z, self.Z))
        v = np.where(z < -self.Z, 0.0, np.where(z > self.Z, 1.0, v))
        v = np.where(v < self.TAIL, 0.0, np.where(v > 1.0 - self.TAIL, 1.0, v))
        return v if v.ndim else float(v)

    def slope(self, z):
        return np.interp(np.asarray(z, dtype=float), self.z, self.dtheta)


def traveling_wave(p: BulkPotential, Z: float = 8.0, n: int = 3201,
                   pin: float | None = None) -> TravelingWaveProfile:
    """Integrate theta' = g(theta) through the layer by RK4.

    ``pin`` fixes theta(0); by default the profile is pinned where the
    antiderivative of g reaches half its bulk value (dist(theta(0)) = m/2),
    which centers the measured midlevel on z = 0. The equation is the
    first-order reduction of the layer ODE -theta'' + f'(theta) = 0 under
    equipartition theta'^2 = 2 f(theta).
    """
    si = np.linspace(1e-3, 1.0 - 1e-3, 1001)
    gmin = float(np.min(p.g(si)))
    if gmin <= 0.0:
        raise ProfileError("g vanishes inside (0, 1): profile does not connect the wells")
    if pin is None:
        pin = float(brentq(lambda s: p.dist(s) - 0.5 * p.mass, 1e-12, 1.0 - 1e-12))
    if not 0.0 < pin < 1.0:
        raise ProfileError("pin value must lie strictly between the wells")

    if n % 2 == 0:
        n += 1
    half = (n - 1) // 2
    dz = Z / half
    sub = max(1, int(np.ceil(dz / 2e-3)))
    hs = dz / sub

    def g_clamped(y):
        return p.g(min(max(y, 0.0), 1.0))

    def march(sign):
        vals = np.empty(half + 1)
        y = pin
        vals[0] = y
        for i in range(1, half + 1):
            for _ in range(sub):
                k1 = g_clamped(y)
                k2 = g_clamped(y + sign * 0.5 * hs * k1)
                k3 = g_clamped(y + sign * 0.5 * hs * k2)
                k4 = g_clamped(y + sign * hs * k3)
                y += sign * hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                y = min(max(y, 0.0), 1.0)
            vals[i] = y
        return vals

    up = march(+1.0)
    down = march(-1.0)
    theta = np.concatenate([down[::-1], up[1:]])
    z = np.linspace(-Z, Z, n)
    prof = TravelingWaveProfile(z=z, theta=theta, dtheta=np.asarray(p.g(theta), dtype=float),
                                pin=pin, Z=Z)
    if prof.theta[0] > 1e-6 or prof.theta[-1] < 1.0 - 1e-6:
        raise ProfileError(
            f"window Z = {Z} too small: tails reach {prof.theta[0]:.2e} / {1 - prof.theta[-1]:.2e}"
        )
    return prof
