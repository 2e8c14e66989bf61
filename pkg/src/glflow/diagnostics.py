"""Per-frame analysis quantities: modulated energy with its coercivity
gaps, phase-indicator errors, level-set lengths, anchoring masses,
tangential-derivative and director statistics, bulk director residual, and
polar extraction.

Two discrete phase gradients coexist deliberately:

* level sets, anchoring masses, indicator errors and the reported
  |grad psi|_L1 difference the nodal indicator field directly (the
  bounded-variation flavor; no 0/0 at u = 0);
* the modulated-energy frame evaluates its gradient terms through the exact
  discrete chain rule grad_i psi = (d_i u . dF'(u)), which makes the
  Pythagoras/Cauchy-Schwarz orderings between the gaps and the modulated
  energy exact algebra rather than O(h^2) statements. The mismatch of the
  two gradients is itself a measured property (see the tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, VectorField2, deriv_x, deriv_y, divergence, gradient, rot
from .geometry import CutoffProfile, InterfaceGeometry
from .potential import BulkPotential

# ---------------------------------------------------------------------------
# basic fields


def phase_indicator(u: VectorField2, p: BulkPotential) -> ScalarField:
    """psi = dist(|u|) nodewise (approaches `p.mass` in the filled bulk)."""
    amp = np.hypot(u.data[0], u.data[1])
    return ScalarField(u.grid, np.asarray(p.dist(amp)))


def director(u: VectorField2) -> np.ndarray:
    """u/|u| where u is nonzero, 0 elsewhere."""
    amp = np.hypot(u.data[0], u.data[1])
    safe = np.where(amp > 0, amp, 1.0)
    return np.where(amp > 0, u.data / safe, 0.0)


def phase_normal(psi: ScalarField) -> np.ndarray:
    """grad psi / |grad psi| (direct differencing), 0 where the gradient
    vanishes."""
    gp = gradient(psi).data
    norm = np.hypot(gp[0], gp[1])
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, gp / safe, 0.0)


def projection_split(u: VectorField2):
    """Decompose the discrete gradient along/against the director.

    Returns (grad_sq, proj_sq, orth_sq, proj_coeff, amp, uh) where
    proj_coeff[d] is the component of d_d u along u/|u|; the split is an
    exact nodewise Pythagoras identity grad_sq = proj_sq + orth_sq.
    """
    g = u.grid
    u1, u2 = u.data[0], u.data[1]
    du = np.stack([
        np.stack([deriv_x(u1, g), deriv_y(u1, g)]),
        np.stack([deriv_x(u2, g), deriv_y(u2, g)]),
    ])
    amp = np.hypot(u1, u2)
    safe = np.where(amp > 0, amp, 1.0)
    uh = np.where(amp > 0, u.data / safe, 0.0)
    a = np.stack([du[0, d] * uh[0] + du[1, d] * uh[1] for d in range(2)])
    proj_sq = a[0] ** 2 + a[1] ** 2
    orth_sq = sum((du[c, d] - uh[c] * a[d]) ** 2 for c in range(2) for d in range(2))
    grad_sq = sum(du[c, d] ** 2 for c in range(2) for d in range(2))
    return grad_sq, proj_sq, orth_sq, a, amp, uh


def polar_extract(u: VectorField2):
    """(amplitude, phase) with the phase unwrapped along grid rows on runs
    where the amplitude exceeds 1/2, NaN elsewhere."""
    rho = np.hypot(u.data[0], u.data[1])
    raw = np.arctan2(u.data[1], u.data[0])
    phase = np.full_like(raw, np.nan)
    valid = rho > 0.5
    for j in range(raw.shape[0]):
        row_valid = valid[j]
        if not row_valid.any():
            continue
        idx = np.nonzero(row_valid)[0]
        splits = np.nonzero(np.diff(idx) > 1)[0]
        for run in np.split(idx, splits + 1):
            phase[j, run] = np.unwrap(raw[j, run])
    return ScalarField(u.grid, rho), ScalarField(u.grid, phase)


# ---------------------------------------------------------------------------
# modulated energy frame


@dataclass
class ModulatedEnergyFrame:
    """Modulated energy and the coercivity quantities measured with it.

    gap_cal   : energy surplus over the phase-gradient mass
    gap_proj  : anisotropic + orthogonal-gradient square integrals
    gap_equi  : squared equipartition mismatch
    gap_align : (1 - calibration . phase normal)-weighted density
    gap_dist  : distance-squared-weighted density
    """

    t: float
    modulated: float
    gap_cal: float
    gap_proj: float
    gap_equi: float
    gap_align: float
    gap_dist: float
    energy: float
    grad_phase_l1: float
    l4_norm: float
    sup_norm: float


def modulated_energy(u: VectorField2, geom: InterfaceGeometry, p: BulkPotential,
                     eps: float, mu: float, t: float = 0.0) -> ModulatedEnergyFrame:
    g = u.grid
    w = g.quad_weights()
    grad_sq, proj_sq, orth_sq, a, amp, _ = projection_split(u)
    g_abs = np.asarray(p.g(amp))
    # chain-rule phase gradient and its unit direction
    pg = g_abs[None] * a
    pg_norm = np.hypot(pg[0], pg[1])
    n_cr = np.where(pg_norm > 0, pg / np.where(pg_norm > 0, pg_norm, 1.0), 0.0)

    divu = divergence(u).data
    F = np.asarray(p.f(amp))
    calib = geom.ext.normal  # unit-capped normal extension (the calibration)
    d = geom.sdf.values

    density = 0.5 * eps * grad_sq + F / eps
    pairing = calib[0] * pg[0] + calib[1] * pg[1]
    modulated = float(np.sum(w * (0.5 * eps * mu * divu**2 + density - pairing)))
    energy = float(np.sum(w * (0.5 * eps * mu * divu**2 + density)))
    gap_cal = float(np.sum(w * (density - pg_norm)))
    gap_proj = float(np.sum(w * eps * (mu * divu**2 + orth_sq)))
    gap_equi = float(np.sum(w * (np.sqrt(eps) * np.sqrt(proj_sq) - g_abs / np.sqrt(eps)) ** 2))
    align = 1.0 - (calib[0] * n_cr[0] + calib[1] * n_cr[1])
    gap_align = float(np.sum(w * (density + pg_norm) * align))
    gap_dist = float(np.sum(w * (density + pg_norm) * np.minimum(d * d, 1.0)))

    psi = phase_indicator(u, p)
    gp = gradient(psi).data
    grad_phase_l1 = float(np.sum(w * np.hypot(gp[0], gp[1])))
    l4 = float(np.sum(w * amp**4) ** 0.25)
    return ModulatedEnergyFrame(
        t=t, modulated=modulated, gap_cal=gap_cal, gap_proj=gap_proj, gap_equi=gap_equi,
        gap_align=gap_align, gap_dist=gap_dist, energy=energy,
        grad_phase_l1=grad_phase_l1, l4_norm=l4, sup_norm=float(amp.max()),
    )


def phase_error(u: VectorField2, geom: InterfaceGeometry, p: BulkPotential):
    """(bulk L1, distance-weighted L1 over the delta0 band) of
    psi - mass * indicator(inside)."""
    g = u.grid
    w = g.quad_weights()
    psi = phase_indicator(u, p).data
    d = geom.sdf.values
    target = p.mass * (d > 0)
    err = np.abs(psi - target)
    bulk = float(np.sum(w * err))
    band = np.abs(d) < geom.cutoff.delta0
    weighted = float(np.sum((w * err * np.abs(d))[band]))
    return bulk, weighted


# ---------------------------------------------------------------------------
# marching squares

_SEG_TABLE = {
    1: [("W", "S")], 2: [("S", "E")], 3: [("W", "E")], 4: [("E", "N")],
    6: [("S", "N")], 7: [("W", "N")], 8: [("W", "N")], 9: [("S", "N")],
    11: [("E", "N")], 12: [("W", "E")], 13: [("S", "E")], 14: [("W", "S")],
}


def contour_segments(s: ScalarField, level: float) -> np.ndarray:
    """Marching-squares segments of {s = level}, shape (K, 2, 2). Saddle
    cells are disambiguated by the cell-center average."""
    g = s.grid
    v = s.data - level
    sw = v[:-1, :-1]
    se = v[:-1, 1:]
    ne = v[1:, 1:]
    nw = v[1:, :-1]
    code = (sw > 0) * 1 + (se > 0) * 2 + (ne > 0) * 4 + (nw > 0) * 8
    mixed = np.nonzero((code > 0) & (code < 15))
    xs, ys = g.xs(), g.ys()
    h = g.h
    segs = []

    def edge_point(name, j, i):
        if name == "S":
            a, b = sw[j, i], se[j, i]
            t = a / (a - b)
            return (xs[i] + t * h, ys[j])
        if name == "E":
            a, b = se[j, i], ne[j, i]
            t = a / (a - b)
            return (xs[i + 1], ys[j] + t * h)
        if name == "N":
            a, b = nw[j, i], ne[j, i]
            t = a / (a - b)
            return (xs[i] + t * h, ys[j + 1])
        a, b = sw[j, i], nw[j, i]
        t = a / (a - b)
        return (xs[i], ys[j] + t * h)

    for j, i in zip(*mixed):
        c = code[j, i]
        if c in (5, 10):
            center_above = (sw[j, i] + se[j, i] + ne[j, i] + nw[j, i]) > 0
            if c == 5:
                pairs = [("W", "N"), ("S", "E")] if center_above else [("W", "S"), ("E", "N")]
            else:
                pairs = [("W", "S"), ("E", "N")] if center_above else [("W", "N"), ("S", "E")]
        else:
            pairs = _SEG_TABLE[c]
        for e1, e2 in pairs:
            segs.append((edge_point(e1, j, i), edge_point(e2, j, i)))
    if not segs:
        return np.zeros((0, 2, 2))
    return np.asarray(segs)


def contour_length(segments: np.ndarray) -> float:
    if len(segments) == 0:
        return 0.0
    return float(np.sum(np.linalg.norm(segments[:, 1] - segments[:, 0], axis=1)))


@dataclass
class LevelBand:
    lower: float
    upper: float
    mask: np.ndarray
    lower_length: float
    upper_length: float
    lower_segments: np.ndarray
    upper_segments: np.ndarray
    ref_length: float | None = None
    no_lower_contour: bool = False

    @property
    def lower_relative_error(self) -> float:
        if not self.ref_length:
            return float("nan")
        return abs(self.lower_length - self.ref_length) / self.ref_length


def level_set_report(psi: ScalarField, p: BulkPotential, ref_length: float | None = None,
                     delta: float | None = None) -> LevelBand:
    """Contours at the fixed thresholds mass/2 and 2*mass (the midpoints of
    the search windows; ``delta`` only validates the window half-width)."""
    if delta is not None and not 0.0 < delta < p.mass / 8.0:
        raise ValueError("delta must lie in (0, mass/8)")
    lower = 0.5 * p.mass
    upper = 2.0 * p.mass
    segs_b = contour_segments(psi, lower)
    segs_q = contour_segments(psi, upper)
    mask = (psi.data > lower) & (psi.data < upper)
    return LevelBand(
        lower=lower,
        upper=upper,
        mask=mask,
        lower_length=contour_length(segs_b),
        upper_length=contour_length(segs_q),
        lower_segments=segs_b,
        upper_segments=segs_q,
        ref_length=ref_length,
        no_lower_contour=len(segs_b) == 0,
    )


# ---------------------------------------------------------------------------
# anchoring


@dataclass
class AnchoringFrame:
    band_mass: float     # integral of |grad psi| over the band
    anchor_mass: float   # integral of (director . phase normal)^2 |grad psi|
    over_eps: float


def anchoring_defect(u: VectorField2, psi: ScalarField, band: LevelBand,
                     eps: float) -> AnchoringFrame:
    g = u.grid
    w = g.quad_weights()
    gp = gradient(psi).data
    gnorm = np.hypot(gp[0], gp[1])
    n = np.where(gnorm > 0, gp / np.where(gnorm > 0, gnorm, 1.0), 0.0)
    uh = director(u)
    cos2 = (uh[0] * n[0] + uh[1] * n[1]) ** 2
    m = band.mask
    band_mass = float(np.sum((w * gnorm)[m]))
    anchor_mass = float(np.sum((w * cos2 * gnorm)[m]))
    return AnchoringFrame(band_mass=band_mass, anchor_mass=anchor_mass,
                          over_eps=anchor_mass / eps)


# ---------------------------------------------------------------------------
# auxiliary functionals


def auxiliary_bounds(u: VectorField2, d: np.ndarray, grad_d: np.ndarray,
                     delta0: float, eps: float, p: BulkPotential) -> dict:
    """Tangential-derivative functional, director derivative integrals, and
    the off-band bulk norms (reported raw; callers track ratios to the
    modulated energy). ``d``/``grad_d`` come from the signed distance of the
    synchronized geometry."""
    g = u.grid
    w = g.quad_weights()
    u1, u2 = u.data[0], u.data[1]
    du = np.stack([
        np.stack([deriv_x(u1, g), deriv_y(u1, g)]),
        np.stack([deriv_x(u2, g), deriv_y(u2, g)]),
    ])
    # unit distance gradient (normal direction) where defined
    gn = np.hypot(grad_d[0], grad_d[1])
    nvec = np.where(gn > 0.5, grad_d / np.where(gn > 0.5, gn, 1.0), 0.0)
    t_abs = np.abs(d) / delta0
    eta1 = np.where(t_abs <= 3.0, 1.0,
                    np.where(t_abs >= 4.0, 0.0, CutoffProfile.phi(t_abs - 3.0)))
    tang = 0.0
    for c in range(2):
        radial = du[c, 0] * nvec[0] + du[c, 1] * nvec[1]
        for dd in range(2):
            tang_comp = du[c, dd] - radial * nvec[dd]
            tang += np.sum(w * eta1 * tang_comp**2)
    amp = np.hypot(u1, u2)
    uh = director(u)
    duh = np.stack([
        np.stack([deriv_x(uh[0], g), deriv_y(uh[0], g)]),
        np.stack([deriv_x(uh[1], g), deriv_y(uh[1], g)]),
    ])
    grad_uh_sq = sum(duh[c, dd] ** 2 for c in range(2) for dd in range(2))
    damp = np.stack([deriv_x(amp, g), deriv_y(amp, g)])
    dir_amp = (uh[0] * damp[0] + uh[1] * damp[1]) ** 2
    grad_sq = sum(du[c, dd] ** 2 for c in range(2) for dd in range(2))
    F = np.asarray(p.f(amp))
    bulk = {}
    for name, mask in (("inside", d > delta0), ("outside", d < -delta0)):
        bulk[name] = float(np.sum((w * (grad_sq + F / eps**2))[mask]))
    return {
        "tangential": float(tang),
        "amp_sq_grad_director": float(np.sum(w * amp**2 * grad_uh_sq)),
        "director_dot_grad_amp": float(np.sum(w * dir_amp)),
        "bulk_inside": bulk["inside"],
        "bulk_outside": bulk["outside"],
    }


# ---------------------------------------------------------------------------
# bulk director residual


@dataclass
class Bump:
    """Radially symmetric C^2 test function (1 - s^2)^3, s = |x - c|/radius."""

    center: tuple[float, float]
    radius: float

    def __call__(self, X, Y):
        s2 = ((X - self.center[0]) ** 2 + (Y - self.center[1]) ** 2) / self.radius**2
        return np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 3, 0.0)

    def grad(self, X, Y):
        dx = X - self.center[0]
        dy = Y - self.center[1]
        s2 = (dx**2 + dy**2) / self.radius**2
        fac = np.where(s2 < 1.0, -6.0 * (1.0 - np.minimum(s2, 1.0)) ** 2 / self.radius**2, 0.0)
        return np.stack([fac * dx, fac * dy])


def make_bump_family(center, region_radius: float, n_centers: int = 4,
                     n_radii: int = 3, seed: int = 7) -> list[Bump]:
    """Fixed seeded family of bumps supported in the disk of the given
    radius about ``center`` (n_radii sizes at n_centers placements)."""
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * np.pi, n_centers)
    offset = 0.35 * region_radius
    fracs = np.linspace(0.25, 0.55, n_radii)
    bumps = []
    for ang in angles:
        cx = center[0] + offset * np.cos(ang)
        cy = center[1] + offset * np.sin(ang)
        for fr in fracs:
            bumps.append(Bump((cx, cy), fr * region_radius))
    return bumps


class ErodedBulkEmpty(RuntimeError):
    pass


def of_residual(u_prev: VectorField2, u_next: VectorField2, dt: float, mu: float,
                bumps: list[Bump], geom: InterfaceGeometry, eps: float) -> list[dict]:
    """Weak-formulation residual of the bulk director flow for each test
    function: R = int (dt_u ^ u) phi + mu int (div u) rot(phi u)
    + int grad phi . (grad u ^ u), with the time derivative from the two
    frames and u their average. Reported raw and normalized by the largest
    of the three terms' L1 magnitudes. Test functions must be supported in
    the eroded bulk {d > 3 eps}."""
    g = u_prev.grid
    w = g.quad_weights()
    d = geom.sdf.values
    eroded = d > 3.0 * eps
    if not eroded.any():
        raise ErodedBulkEmpty("no interior nodes clear the 3*eps dilation margin")
    X, Y = g.meshgrid()
    um = VectorField2(g, 0.5 * (u_prev.data + u_next.data), u_prev.fixed_boundary)
    dtu = (u_next.data - u_prev.data) / dt
    u1, u2 = um.data[0], um.data[1]
    du = np.stack([
        np.stack([deriv_x(u1, g), deriv_y(u1, g)]),
        np.stack([deriv_x(u2, g), deriv_y(u2, g)]),
    ])
    divu = divergence(um).data
    results = []
    for b in bumps:
        phi = b(X, Y)
        support = phi > 0
        if np.any(support & ~eroded):
            results.append({"flagged": True, "reason": "support leaves the eroded bulk",
                            "raw": np.nan, "normalized": np.nan})
            continue
        gphi = b.grad(X, Y)
        i1 = (dtu[0] * u2 - dtu[1] * u1) * phi
        prod = VectorField2(g, np.stack([phi * u1, phi * u2]))
        i2 = mu * divu * rot(prod).data
        wedge_x = du[0, 0] * u2 - du[1, 0] * u1
        wedge_y = du[0, 1] * u2 - du[1, 1] * u1
        i3 = gphi[0] * wedge_x + gphi[1] * wedge_y
        t1 = float(np.sum(w * i1))
        t2 = float(np.sum(w * i2))
        t3 = float(np.sum(w * i3))
        mags = [float(np.sum(w * np.abs(i))) for i in (i1, i2, i3)]
        raw = t1 + t2 + t3
        denom = max(mags) or 1.0
        results.append({
            "flagged": False, "raw": raw, "normalized": abs(raw) / denom,
            "terms": (t1, t2, t3), "magnitudes": tuple(mags),
            "center": b.center, "radius": b.radius,
        })
    if all(r["flagged"] for r in results):
        raise ErodedBulkEmpty("every test function leaves the eroded bulk")
    return results
