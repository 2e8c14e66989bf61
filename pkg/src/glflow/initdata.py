"""Well-prepared initial data: traveling-wave amplitude across the interface
composed with a unit director.

The amplitude is s(x) = plateau(d) * theta(d/eps) + (1 - plateau(d)) * 1{d>0},
exactly 1 deep inside, exactly 0 deep outside (the profile clamps sub-1e-8
tails). Families for the director:

* ``vortex``: tangential unit field about the circle center. Exactly
  tangential and divergence free in the continuum; the core carries an
  eps*log(1/eps) energy, so rate measurements for this family normalize by
  eps*log(1/eps). Requires a circular interface (degree obstruction: no
  smooth unit field inside a disk is tangential at the boundary without a
  defect, so the centered defect is the canonical choice).
* ``constant``: fixed unit vector; deliberately not well prepared (the
  normal-direction divergence contributes an O(1) modulated energy), kept
  as the negative control.
* ``custom_phase``: direction (cos Phi, sin Phi) from a user scalar phase.
* ``tangential_defect``: custom phase from the mirror-charge construction
  below; exactly tangential at the circle with an off-center defect, the
  canonical data for a nonvanishing anchoring signal.
"""

from __future__ import annotations

import numpy as np

from .fields import VectorField2
from .geometry import CutoffProfile, GeometryError, InterfaceGeometry, fit_circle
from .potential import BulkPotential, TravelingWaveProfile, traveling_wave

FAMILIES = ("vortex", "constant", "custom_phase", "tangential_defect")


def tangential_defect_phase(center, radius: float, defect, grid) -> np.ndarray:
    """Scalar phase of a degree-1 director with its defect at ``defect``
    (inside the circle) whose trace on the circle is exactly tangential.

    Mirror-charge construction: with w = z - c, alpha = a - c and the
    inverted point beta = r^2 / conj(alpha), the sum of polar angles about
    alpha and beta equals arg(w) + pi + arg(alpha) on the circle, so adding
    the constant -pi/2 - arg(alpha) pins the boundary phase at
    arg(w) + pi/2, the counterclockwise tangent direction. Unlike the
    centered vortex the resulting field is not rotation-equivariant, so the
    flow develops a measurable anchoring defect.
    """
    ax = defect[0] - center[0]
    ay = defect[1] - center[1]
    amod2 = ax * ax + ay * ay
    if amod2 >= radius * radius:
        raise ValueError("defect must lie strictly inside the circle")
    scale = radius * radius / amod2
    bx = center[0] + ax * scale
    by = center[1] + ay * scale
    X, Y = grid.meshgrid()
    phase = np.arctan2(Y - defect[1], X - defect[0]) \
        + np.arctan2(Y - by, X - bx) \
        - 0.5 * np.pi - np.arctan2(ay, ax)
    return phase


def transition_amplitude(d, profile: TravelingWaveProfile, cutoff: CutoffProfile, eps: float):
    """Amplitude profile from signed-distance values (array in, array out)."""
    d = np.asarray(d, dtype=float)
    eta = cutoff.plateau(d)
    return eta * profile(d / eps) + (1.0 - eta) * (d > 0.0)


def make_well_prepared(family: str, geom: InterfaceGeometry, p: BulkPotential, eps: float,
                       profile: TravelingWaveProfile | None = None,
                       direction=(1.0, 0.0), phase=None, defect=None) -> VectorField2:
    """Compose the transition amplitude with the family's unit director."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    grid = geom.sdf.grid
    if profile is None:
        profile = traveling_wave(p)
    if family == "tangential_defect":
        fit = fit_circle(geom.curve)
        if fit is None:
            raise GeometryError("tangential_defect family requires a circular interface")
        if defect is None:
            raise ValueError("tangential_defect family needs a defect position")
        phase = tangential_defect_phase(fit[0], fit[1], defect, grid)
        family = "custom_phase"
    if family == "vortex":
        fit = fit_circle(geom.curve)
        if fit is None:
            raise GeometryError("vortex family requires a circular interface")
        center, radius = fit
        X, Y = grid.meshgrid()
        dx = X - center[0]
        dy = Y - center[1]
        r = np.hypot(dx, dy)
        # distance taken from the fitted circle so the data is exactly the
        # equivariant reduction used by the radial reference solver
        amp = transition_amplitude(radius - r, profile, geom.cutoff, eps)
        # the fitted center is within round-off of a node; the director is
        # undefined there and set to zero
        core = r < 1e-9
        rsafe = np.where(core, 1.0, r)
        u1 = np.where(core, 0.0, amp * (-dy / rsafe))
        u2 = np.where(core, 0.0, amp * (dx / rsafe))
        return VectorField2(grid, np.stack([u1, u2]))
    amp = transition_amplitude(geom.sdf.values, profile, geom.cutoff, eps)
    if family == "constant":
        e = np.asarray(direction, dtype=float)
        e = e / np.linalg.norm(e)
        return VectorField2(grid, np.stack([amp * e[0], amp * e[1]]))
    if phase is None:
        raise ValueError("custom_phase family needs a scalar phase field")
    ph = np.asarray(phase, dtype=float)
    if ph.shape != grid.shape:
        raise ValueError("phase shape does not match grid")
    return VectorField2(grid, np.stack([amp * np.cos(ph), amp * np.sin(ph)]))


def well_preparedness_report(u0: VectorField2, geom: InterfaceGeometry, p: BulkPotential,
                             eps: float, mu: float) -> dict:
    """Measured preparedness: modulated energy and its eps / eps*log(1/eps)
    normalizations, the distance-weighted indicator error, total energy and
    the amplitude bound."""
    from .diagnostics import modulated_energy, phase_error

    frame = modulated_energy(u0, geom, p, eps, mu)
    bulk, weighted = phase_error(u0, geom, p)
    log_term = float(np.log(1.0 / eps))
    return {
        "modulated_energy": frame.modulated,
        "over_eps": frame.modulated / eps,
        "over_eps_log": frame.modulated / (eps * log_term),
        "weighted_error": weighted,
        "bulk_error": bulk,
        "energy": frame.energy,
        "sup_norm": frame.sup_norm,
    }
