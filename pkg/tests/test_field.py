import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from accplace.density import ChargeGrid, build_grid
from accplace.field import build_kernel, direct_field, fft_field_fine, FineFFTSolver, grid_direct_field, kernel_values
from accplace.netlist import Region


def charge_grid(M, N, q, region=None):
    spec = build_grid(region or Region(0, 0, M, N), M, N)
    return ChargeGrid(np.asarray(q, float), spec)


def oracle(cg):
    """Pairwise point-charge field at every bin center."""
    xs, ys = cg.spec.centers()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    out = direct_field(pts, cg.q.ravel(), pts)
    return out[:, 0].reshape(cg.q.shape), out[:, 1].reshape(cg.q.shape)


def rel(a, b):
    return np.linalg.norm(np.concatenate([(a[0] - b[0]).ravel(), (a[1] - b[1]).ravel()])) / \
        np.linalg.norm(np.concatenate([b[0].ravel(), b[1].ravel()]))


def test_kernel_axis_case():
    hx, hy = kernel_values(3.0, 0.0, k_e=2.0)
    assert hx == pytest.approx(2.0 / 9) and hy == 0


def test_kernel_zero_offset():
    spec = build_grid(Region(0, 0, 8, 8), 8, 8)
    k = build_kernel(spec)
    assert k.hx[k.origin] == 0 and k.hy[k.origin] == 0


def test_kernel_magnitude_identity():
    rng = np.random.default_rng(0)
    d = rng.uniform(-50, 50, (100, 2))
    hx, hy = kernel_values(d[:, 0], d[:, 1], k_e=1.7)
    assert np.allclose(np.hypot(hx, hy) * (d ** 2).sum(1), 1.7, rtol=1e-12)


def test_kernel_parity():
    spec = build_grid(Region(0, 0, 16, 8), 16, 8)
    k = build_kernel(spec)
    assert np.allclose(k.hx, -k.hx[::-1, :]) and np.allclose(k.hx, k.hx[:, ::-1])
    assert np.allclose(k.hy, -k.hy[:, ::-1]) and np.allclose(k.hy, k.hy[::-1, :])


def test_direct_unit_charge():
    assert np.allclose(direct_field([[0, 0]], [1.0], [[4, 0]], k_e=3.0), [[3.0 / 16, 0]])


def test_direct_symmetric_pair_cancels():
    assert np.allclose(direct_field([[-2, 1], [2, -1]], [1.5, 1.5], [[0, 0]]), 0, atol=1e-15)


def test_direct_superposition():
    rng = np.random.default_rng(1)
    p1, p2, ev = rng.uniform(0, 10, (20, 2)), rng.uniform(0, 10, (30, 2)), rng.uniform(0, 10, (40, 2))
    q1, q2 = rng.random(20), rng.random(30)
    both = direct_field(np.vstack([p1, p2]), np.concatenate([q1, q2]), ev)
    split = direct_field(p1, q1, ev) + direct_field(p2, q2, ev)
    assert np.linalg.norm(both - split) <= 1e-12 * np.linalg.norm(both)


def test_single_bin_charge_fine_fft_exact():
    q = np.zeros((32, 32))
    q[7, 20] = 1.0
    cg = charge_grid(32, 32, q)
    fm = fft_field_fine(cg)
    assert rel((fm.xi_x, fm.xi_y), oracle(cg)) <= 1e-10


def test_uniform_charge_center_is_field_free():
    cg = charge_grid(16, 16, np.ones((16, 16)))
    fm = fft_field_fine(cg)
    c = fm.xi_x[7:9, 7:9], fm.xi_y[7:9, 7:9]
    scale = np.abs(fm.xi_x).max()
    # the four center bins sit symmetrically; their field magnitudes agree and point outward
    assert np.allclose(np.abs(c[0]), np.abs(c[0][0, 0]), atol=1e-12 * scale)
    assert np.allclose(fm.xi_x + fm.xi_x[::-1, :], 0, atol=1e-12 * scale)
    cg9 = charge_grid(16, 16, np.pad(np.ones((15, 15)), ((0, 1), (0, 1))))
    fm9 = fft_field_fine(cg9)
    assert abs(fm9.xi_x[7, 7]) <= 1e-12 * scale and abs(fm9.xi_y[7, 7]) <= 1e-12 * scale


def test_random_64_fine_fft_exact():
    cg = charge_grid(64, 64, np.random.default_rng(2).random((64, 64)))
    fm = fft_field_fine(cg)
    assert rel((fm.xi_x, fm.xi_y), oracle(cg)) <= 1e-10


def test_rectangular_bins_fine_fft_exact():
    rng = np.random.default_rng(3)
    cg = charge_grid(16, 32, rng.random((16, 32)), Region(0, 0, 40, 24))
    fm = fft_field_fine(cg)
    assert rel((fm.xi_x, fm.xi_y), oracle(cg)) <= 1e-10
    g = grid_direct_field(cg)
    assert rel((g.xi_x, g.xi_y), oracle(cg)) <= 1e-12


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([(8, 8), (16, 8), (16, 16)]))
def test_reflection_antisymmetry(seed, shape):
    M, N = shape
    q = np.random.default_rng(seed).random(shape)
    a = fft_field_fine(charge_grid(M, N, q))
    b = fft_field_fine(charge_grid(M, N, q[::-1, ::-1]))
    assert np.allclose(b.xi_x, -a.xi_x[::-1, ::-1], atol=1e-12)
    assert np.allclose(b.xi_y, -a.xi_y[::-1, ::-1], atol=1e-12)


def test_action_reaction_two_bins():
    q = np.zeros((16, 16))
    q[2, 3], q[11, 9] = 2.0, 0.5
    fm = fft_field_fine(charge_grid(16, 16, q))
    f1 = q[2, 3] * np.array([fm.xi_x[2, 3], fm.xi_y[2, 3]])
    f2 = q[11, 9] * np.array([fm.xi_x[11, 9], fm.xi_y[11, 9]])
    assert np.allclose(f1, -f2, rtol=0, atol=1e-12 * np.abs(f1).max())


def test_solver_counts_one_fft_pair_per_call():
    cg = charge_grid(16, 16, np.ones((16, 16)))
    s = FineFFTSolver(cg.spec)
    s(cg)
    s(cg)
    assert s.fft_count == 4


@pytest.mark.parametrize("n", [32, 64, 128])
def test_fine_fft_exact_up_to_128(n):
    cg = charge_grid(n, n, np.random.default_rng(n).random((n, n)))
    t0 = time.perf_counter()
    fm = fft_field_fine(cg)
    assert time.perf_counter() - t0 <= 5
    assert rel((fm.xi_x, fm.xi_y), oracle(cg)) <= 1e-10


def test_rect_field_matches_quadrature():
    from accplace.field import rect_field_potential
    rect = np.array([[1.0, 2.0, 4.0, 3.5]])
    n = 600
    xs = np.linspace(1, 4, n + 1)
    ys = np.linspace(2, 3.5, n + 1)
    X, Y = np.meshgrid((xs[1:] + xs[:-1]) / 2, (ys[1:] + ys[:-1]) / 2, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], 1)
    q = np.full(len(pts), 2.0 * 4.5 / len(pts))
    ev = np.array([[6.0, 1.0], [0.0, 5.0], [2.5, -3.0], [4.0, 1.0], [-3.0, 2.75]])
    xi, phi = rect_field_potential(rect, 2.0, ev)
    assert np.allclose(xi, direct_field(pts, q, ev), rtol=1e-5, atol=1e-7)
    from accplace.field import direct_potential
    assert np.allclose(phi, direct_potential(pts, q, ev), rtol=1e-5)


def test_rect_field_is_minus_potential_gradient():
    from accplace.field import rect_field_potential
    rects = np.array([[0.0, 0.0, 5.0, 3.0], [1.0, 1.0, 2.0, 2.0]])
    rng = np.random.default_rng(0)
    ev = rng.uniform(-2, 7, (30, 2))
    xi, _ = rect_field_potential(rects, [1.0, -0.5], ev)
    h = 1e-6
    for axis in (0, 1):
        d = np.zeros(2)
        d[axis] = h
        num = -(rect_field_potential(rects, [1.0, -0.5], ev + d)[1]
                - rect_field_potential(rects, [1.0, -0.5], ev - d)[1]) / (2 * h)
        assert np.allclose(xi[:, axis], num, rtol=1e-5, atol=1e-6)
