"""Grid containers and discrete differential operators for planar fields.

Arrays are indexed ``[iy, ix]`` (x varies along the last axis). Each side of
the rectangle carries a boundary tag: ``dirichlet0``, ``fixed`` (value
Dirichlet, the array's own boundary entries are the data) or ``periodic``
(must pair with the opposite side).

Operator conventions, chosen so that discrete duality is exact:

* ``gradient``/``divergence``/``rot`` are second-order central stencils. On a
  non-periodic axis the output is zeroed on the two boundary lines; with that
  convention ``<gradient(s), v> = -<s, divergence(v)>`` holds to round-off for
  every ``v`` vanishing on the boundary, and ``grad_div = gradient o
  divergence`` is symmetric negative semidefinite.
* ``laplacian`` is the compact 5-point stencil; ``<lap(v), v> =
  -grad_energy(v)`` exactly for zero-Dirichlet ``v``, where ``grad_energy``
  is the face-based (forward-difference) Dirichlet energy. That face energy
  is also a second-order accurate quadrature of the gradient integral, so the
  solver uses it inside the total energy.
* ``integrate``/``inner`` use trapezoid nodal weights (full weight everywhere
  on periodic axes). Sums are numpy pairwise reductions: fixed shape, fixed
  order, bit-identical across repeated calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VALID_TAGS = ("dirichlet0", "periodic", "fixed")


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid.

    bc = (left, right, bottom, top) side tags. A periodic axis covers
    [o, o + n*h) with no duplicated node; a bounded axis covers
    [o, o + (n-1)*h].
    """

    nx: int
    ny: int
    h: float
    origin: tuple[float, float] = (0.0, 0.0)
    bc: tuple[str, str, str, str] = ("dirichlet0",) * 4

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ValueError("grid must have at least 16 nodes per axis")
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        for tag in self.bc:
            if tag not in VALID_TAGS:
                raise ValueError(f"unknown boundary tag {tag!r}")
        if (self.bc[0] == "periodic") != (self.bc[1] == "periodic"):
            raise ValueError("periodic tags must pair in x")
        if (self.bc[2] == "periodic") != (self.bc[3] == "periodic"):
            raise ValueError("periodic tags must pair in y")

    @property
    def periodic_x(self) -> bool:
        return self.bc[0] == "periodic"

    @property
    def periodic_y(self) -> bool:
        return self.bc[2] == "periodic"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def xs(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(self.ny)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs(), self.ys())

    def quad_weights(self) -> np.ndarray:
        wx = np.ones(self.nx)
        wy = np.ones(self.ny)
        if not self.periodic_x:
            wx[0] = wx[-1] = 0.5
        if not self.periodic_y:
            wy[0] = wy[-1] = 0.5
        return self.h * self.h * np.outer(wy, wx)

    def zero_boundary_mask(self) -> np.ndarray:
        """True on nodes belonging to a non-periodic side."""
        m = np.zeros(self.shape, dtype=bool)
        if not self.periodic_x:
            m[:, 0] = m[:, -1] = True
        if not self.periodic_y:
            m[0, :] = m[-1, :] = True
        return m


@dataclass
class ScalarField:
    grid: Grid2D
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=float)
        if self.data.shape != self.grid.shape:
            raise ValueError("scalar data shape does not match grid")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.data.copy())


@dataclass
class VectorField2:
    """Planar vector field, data shape (2, ny, nx).

    ``fixed_boundary`` snapshots the boundary entries at construction; the
    solver reapplies it after every mutation so side tags stay honored.
    """

    grid: Grid2D
    data: np.ndarray
    fixed_boundary: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=float)
        if self.data.shape != (2, *self.grid.shape):
            raise ValueError("vector data shape does not match grid")
        if self.fixed_boundary is None and "fixed" in self.grid.bc:
            self.fixed_boundary = self.data.copy()
        apply_bc(self)

    def copy(self) -> "VectorField2":
        return VectorField2(self.grid, self.data.copy(), self.fixed_boundary)


def apply_bc(v: VectorField2) -> VectorField2:
    """Re-impose the grid's side tags on the boundary lines of v."""
    g = v.grid
    sides = (
        (g.bc[0], (slice(None), slice(None), 0)),
        (g.bc[1], (slice(None), slice(None), -1)),
        (g.bc[2], (slice(None), 0, slice(None))),
        (g.bc[3], (slice(None), -1, slice(None))),
    )
    for tag, idx in sides:
        if tag == "dirichlet0":
            v.data[idx] = 0.0
        elif tag == "fixed":
            v.data[idx] = v.fixed_boundary[idx]
    return v


# ---------------------------------------------------------------------------
# stencil helpers on raw arrays


def _shift(a: np.ndarray, axis: int, step: int, periodic: bool) -> np.ndarray:
    """a evaluated at index+step along axis; replicated past non-periodic
    edges (those entries are only ever read where the output gets zeroed)."""
    if periodic:
        return np.roll(a, -step, axis=axis)
    out = np.empty_like(a)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if step > 0:
        dst[axis] = slice(0, n - step)
        src[axis] = slice(step, n)
        out[tuple(dst)] = a[tuple(src)]
        pad = [slice(None)] * a.ndim
        pad[axis] = slice(n - step, n)
        edge = [slice(None)] * a.ndim
        edge[axis] = slice(n - 1, n)
        out[tuple(pad)] = a[tuple(edge)]
    else:
        dst[axis] = slice(-step, n)
        src[axis] = slice(0, n + step)
        out[tuple(dst)] = a[tuple(src)]
        pad = [slice(None)] * a.ndim
        pad[axis] = slice(0, -step)
        edge = [slice(None)] * a.ndim
        edge[axis] = slice(0, 1)
        out[tuple(pad)] = a[tuple(edge)]
    return out


def _zero_sides(a: np.ndarray, grid: Grid2D, axes: str = "xy") -> np.ndarray:
    if "x" in axes and not grid.periodic_x:
        a[..., :, 0] = 0.0
        a[..., :, -1] = 0.0
    if "y" in axes and not grid.periodic_y:
        a[..., 0, :] = 0.0
        a[..., -1, :] = 0.0
    return a


def deriv_x(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    d = (_shift(a, -1, 1, grid.periodic_x) - _shift(a, -1, -1, grid.periodic_x)) / (2 * grid.h)
    return _zero_sides(d, grid)


def deriv_y(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    d = (_shift(a, -2, 1, grid.periodic_y) - _shift(a, -2, -1, grid.periodic_y)) / (2 * grid.h)
    return _zero_sides(d, grid)


def lap_array(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    h2 = grid.h * grid.h
    out = (
        _shift(a, -1, 1, grid.periodic_x)
        + _shift(a, -1, -1, grid.periodic_x)
        + _shift(a, -2, 1, grid.periodic_y)
        + _shift(a, -2, -1, grid.periodic_y)
        - 4.0 * a
    ) / h2
    return _zero_sides(out, grid)


# ---------------------------------------------------------------------------
# public operators


def gradient(s: ScalarField) -> VectorField2:
    g = s.grid
    return VectorField2(g, np.stack([deriv_x(s.data, g), deriv_y(s.data, g)]))


def divergence(v: VectorField2) -> ScalarField:
    g = v.grid
    return ScalarField(g, deriv_x(v.data[0], g) + deriv_y(v.data[1], g))


def rot(v: VectorField2) -> ScalarField:
    g = v.grid
    return ScalarField(g, -deriv_y(v.data[0], g) + deriv_x(v.data[1], g))


def laplacian(v: VectorField2) -> VectorField2:
    g = v.grid
    return VectorField2(g, np.stack([lap_array(v.data[0], g), lap_array(v.data[1], g)]))


def grad_div(v: VectorField2) -> VectorField2:
    return gradient(divergence(v))


def integrate(s: ScalarField) -> float:
    return float(np.sum(s.grid.quad_weights() * s.data))


def inner(a, b) -> float:
    if a.grid is not b.grid and a.grid != b.grid:
        raise ValueError("fields live on different grids")
    w = a.grid.quad_weights()
    if a.data.ndim == 3:
        return float(np.sum(w * (a.data[0] * b.data[0] + a.data[1] * b.data[1])))
    return float(np.sum(w * a.data * b.data))


def grad_energy(v: VectorField2) -> float:
    """Face-based Dirichlet energy, the discrete version of the gradient
    integral matched to ``laplacian`` (see module docstring)."""
    g = v.grid
    total = 0.0
    for comp in (v.data[0], v.data[1]):
        total += _face_energy(comp, g)
    return total


def _face_energy(a: np.ndarray, g: Grid2D) -> float:
    wx = np.ones(g.nx)
    wy = np.ones(g.ny)
    if not g.periodic_x:
        wx[0] = wx[-1] = 0.5
    if not g.periodic_y:
        wy[0] = wy[-1] = 0.5
    # x-faces: transverse trapezoid weight in y
    if g.periodic_x:
        dx = np.roll(a, -1, axis=1) - a
        ex = np.sum(dx * dx * wy[:, None])
    else:
        dx = a[:, 1:] - a[:, :-1]
        ex = np.sum(dx * dx * wy[:, None])
    if g.periodic_y:
        dy = np.roll(a, -1, axis=0) - a
        ey = np.sum(dy * dy * wx[None, :])
    else:
        dy = a[1:, :] - a[:-1, :]
        ey = np.sum(dy * dy * wx[None, :])
    return float(ex + ey)


# ---------------------------------------------------------------------------
# snapshot i/o (shared with the geometry module)

SNAPSHOT_MAGIC = "glflow-field-v1"


def write_snapshot(path, v) -> None:
    """Text snapshot: header line `magic nx ny h ox oy ncomp bc...` then
    row-major values, one node per line (components space-separated)."""
    g = v.grid
    data = v.data if v.data.ndim == 3 else v.data[None, ...]
    ncomp = data.shape[0]
    with open(path, "w") as f:
        f.write(
            f"{SNAPSHOT_MAGIC} {g.nx} {g.ny} {g.h!r} {g.origin[0]!r} {g.origin[1]!r} "
            f"{ncomp} {' '.join(g.bc)}\n"
        )
        flat = data.reshape(ncomp, -1).T
        for row in flat:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_snapshot(path):
    with open(path) as f:
        head = f.readline().split()
        if head[0] != SNAPSHOT_MAGIC:
            raise ValueError("not a field snapshot")
        nx, ny = int(head[1]), int(head[2])
        h, ox, oy = float(head[3]), float(head[4]), float(head[5])
        ncomp = int(head[6])
        bc = tuple(head[7:11])
        grid = Grid2D(nx, ny, h, (ox, oy), bc)
        vals = np.loadtxt(f, ndmin=2)
    data = vals.T.reshape(ncomp, ny, nx)
    if ncomp == 1:
        return ScalarField(grid, data[0])
    return VectorField2(grid, data)
