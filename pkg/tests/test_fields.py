import numpy as np
import pytest

from glflow.fields import (
    Grid2D,
    ScalarField,
    VectorField2,
    divergence,
    grad_div,
    grad_energy,
    gradient,
    inner,
    integrate,
    laplacian,
    read_snapshot,
    rot,
    write_snapshot,
)


def dirichlet_grid(n=33, h=None):
    h = 1.0 / (n - 1) if h is None else h
    return Grid2D(n, n, h)


def random_zero_dirichlet(grid, seed=0, ncomp=2):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((ncomp, *grid.shape))
    data[:, 0, :] = data[:, -1, :] = 0.0
    data[:, :, 0] = data[:, :, -1] = 0.0
    return VectorField2(grid, data)


def test_linear_field_divergence_and_rot():
    g = Grid2D(33, 33, 1.0 / 32, bc=("fixed",) * 4)
    X, Y = g.meshgrid()
    v = VectorField2(g, np.stack([X, Y]))
    dv = divergence(v).data
    rv = rot(v).data
    assert np.allclose(dv[1:-1, 1:-1], 2.0, atol=1e-12)
    assert np.allclose(rv[1:-1, 1:-1], 0.0, atol=1e-12)


def test_perp_gradient_is_divergence_free():
    g = dirichlet_grid(49)
    X, Y = g.meshgrid()
    s = ScalarField(g, np.sin(3 * X + 1) * np.cos(2 * Y) + X * Y**2)
    gx, gy = gradient(s).data
    perp = VectorField2(g, np.stack([-gy, gx]))
    dv = divergence(perp).data
    assert np.max(np.abs(dv[2:-2, 2:-2])) < 1e-12


def test_rot_of_gradient_vanishes():
    g = dirichlet_grid(49)
    X, Y = g.meshgrid()
    s = ScalarField(g, np.exp(X) * np.sin(2 * Y))
    r = rot(gradient(s)).data
    assert np.max(np.abs(r[2:-2, 2:-2])) < 1e-12


def test_laplacian_truncation_sine():
    n = 129
    g = Grid2D(n, n, 1.0 / (n - 1))
    X, Y = g.meshgrid()
    s = np.sin(np.pi * X) * np.sin(np.pi * Y)
    v = VectorField2(g, np.stack([s, np.zeros_like(s)]))
    lap = laplacian(v).data[0]
    err = np.abs(lap + 2 * np.pi**2 * s)[1:-1, 1:-1]
    assert err.max() <= 5e-3


@pytest.mark.parametrize("bc", [("dirichlet0",) * 4, ("periodic", "periodic", "dirichlet0", "dirichlet0")])
def test_summation_by_parts(bc):
    g = Grid2D(32, 32, 1.0 / 31, bc=bc)
    v = random_zero_dirichlet(g, seed=3)
    lhs = inner(laplacian(v), v)
    rhs = -grad_energy(v)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
    lhs2 = inner(grad_div(v), v)
    rhs2 = -integrate(ScalarField(g, divergence(v).data ** 2))
    assert abs(lhs2 - rhs2) <= 1e-10 * max(1.0, abs(rhs2))


def test_gradient_divergence_duality():
    # adjoint pair on fields vanishing at the boundary (the class the
    # solver's grad-div composition acts on)
    g = dirichlet_grid(32)
    rng = np.random.default_rng(7)
    sdata = rng.standard_normal(g.shape)
    sdata[0, :] = sdata[-1, :] = sdata[:, 0] = sdata[:, -1] = 0.0
    s = ScalarField(g, sdata)
    v = random_zero_dirichlet(g, seed=8)
    lhs = inner(gradient(s), v)
    rhs = -float(np.sum(g.quad_weights() * s.data * divergence(v).data))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_integrate_constant_one():
    g = dirichlet_grid(65)
    assert abs(integrate(ScalarField(g, np.ones(g.shape))) - 1.0) <= 1e-12
    gp = Grid2D(64, 64, 1.0 / 64, bc=("periodic",) * 4)
    assert abs(integrate(ScalarField(gp, np.ones(gp.shape))) - 1.0) <= 1e-12


def test_inner_symmetry_bit_identical():
    g = dirichlet_grid(41)
    rng = np.random.default_rng(5)
    a = VectorField2(g, rng.standard_normal((2, *g.shape)))
    b = VectorField2(g, rng.standard_normal((2, *g.shape)))
    assert inner(a, b) == inner(b, a)


def test_snapshot_roundtrip(tmp_path):
    g = Grid2D(17, 21, 0.25, origin=(1.0, -2.0))
    rng = np.random.default_rng(11)
    v = VectorField2(g, rng.standard_normal((2, 21, 17)))
    p = tmp_path / "snap.txt"
    write_snapshot(p, v)
    back = read_snapshot(p)
    assert back.grid == g
    np.testing.assert_array_equal(back.data, v.data)


def test_grid_rejects_bad_config():
    with pytest.raises(ValueError):
        Grid2D(8, 8, 0.1)
    with pytest.raises(ValueError):
        Grid2D(32, 32, 0.1, bc=("periodic", "dirichlet0", "dirichlet0", "dirichlet0"))
    with pytest.raises(ValueError):
        Grid2D(32, 32, 0.1, bc=("what", "what", "what", "what"))
