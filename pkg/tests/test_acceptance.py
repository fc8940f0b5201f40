"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(and directly when this file is run as a script). Criteria 5, 7 and 8 run
at full size (1024 x 1024 grid, 5000 cells) and take several minutes.
"""

import time

import numpy as np
import pytest
from scipy.ndimage import distance_transform_edt

from accplace.accfft import (AccFFTSolver, build_projection, build_window_plan, coarsen, interpolate,
                             prepare_plan, project_charges, short_range_field)
from accplace.bench import random_charges, rms_rel
from accplace.density import CellSet, ChargeGrid, build_grid, clipped_area, compute_density, to_charges
from accplace.field import FineFFTSolver, direct_field, fft_field_fine
from accplace.netlist import Region, gen_synthetic
from accplace.optimizer import DirectCellSolver, PlacementProblem, clamp_to_region
from accplace.placer import RunConfig, run_global_placement
from accplace.wirelength import WAParams, wa_gradient, wa_wirelength
from conftest import random_netlist, record_criterion


def point_oracle(cg):
    xs, ys = cg.spec.centers()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    out = direct_field(pts, cg.q.ravel(), pts)
    return out[:, 0].reshape(cg.q.shape), out[:, 1].reshape(cg.q.shape)


# ---------------------------------------------------------------- 1

def test_criterion_1_fine_fft_exact():
    worst, slowest = 0.0, 0.0
    rng = np.random.default_rng(101)
    for M, N in [(4, 4), (16, 16), (32, 64), (64, 64), (128, 64), (128, 128)]:
        spec = build_grid(Region(0, 0, M * 1.5, N), M, N)
        for density in (0.01, 0.3, 1.0):
            q = rng.random((M, N)) * (rng.random((M, N)) < density)
            if not q.any():
                q[0, 0] = 1.0
            cg = ChargeGrid(q, spec)
            t0 = time.perf_counter()
            fm = fft_field_fine(cg)
            slowest = max(slowest, time.perf_counter() - t0)
            rx, ry = point_oracle(cg)
            worst = max(worst, rms_rel(fm.xi_x, fm.xi_y, rx, ry),
                        float(np.max(np.hypot(fm.xi_x - rx, fm.xi_y - ry)) / np.max(np.hypot(rx, ry))))
    ok = worst <= 1e-10 and slowest <= 5
    record_criterion(1, ok, f"max relative error {worst:.2e} (bound 1e-10), slowest solve {slowest:.3f}s (bound 5s)")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_2_accfft_accuracy():
    rows, ok = [], True
    for M in (64, 128):
        for count in (1, 10, 200):
            cg = random_charges(M, M, count, seed=M + count)
            rx, ry = point_oracle(cg)
            dist = distance_transform_edt(cg.q == 0)
            errs = {}
            for alpha in (4, 16):
                c = int(round(alpha ** 0.5))
                fm = AccFFTSolver(cg.spec, alpha)(cg)
                overall = rms_rel(fm.xi_x, fm.xi_y, rx, ry)
                far = dist >= 2 * c
                far_err = rms_rel(fm.xi_x, fm.xi_y, rx, ry, far) if far.any() else None
                errs[alpha] = overall
                good = overall <= 0.05 and (far_err is None or far_err <= 0.01)
                ok &= good
                far_s = "n/a" if far_err is None else f"{far_err:.2e}"
                rows.append(f"{M}^2/{count}q/a{alpha}: all {overall:.2e} far {far_s}{'' if good else ' X'}")
            order = errs[16] >= errs[4]
            ok &= order
            if not order:
                rows.append(f"{M}^2/{count}q: error(a16) < error(a4) X")
    record_criterion(2, ok, "; ".join(rows))
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_3_short_range_modes():
    worst, windows = 0.0, 0
    for seed in range(3):
        for alpha, M in ((16, 256), (4, 128)):
            L = coarsen(build_grid(Region(0, 0, M, M), M, M), alpha)
            st_ = build_projection(L)
            plan = prepare_plan(build_window_plan(L), st_)
            rng = np.random.default_rng(seed)
            q = rng.random((M, M)) * (rng.random((M, M)) < rng.uniform(0.05, 1))
            a = short_range_field(q, plan, mode="fft")
            b = short_range_field(q, plan, mode="direct")
            own = plan.ownership().ravel()
            n = int(own.max()) + 1
            diff = np.bincount(own, np.abs(a - b).ravel() ** 2, n)
            ref = np.bincount(own, np.abs(b).ravel() ** 2, n)
            live = ref > 0
            windows += int(live.sum())
            worst = max(worst, float(np.sqrt(diff[live] / ref[live]).max()))
            assert not diff[~live].any()
    ok = windows >= 1000 and worst <= 1e-10
    record_criterion(3, ok, f"{windows} windows, max per-window relative difference {worst:.2e} (bound 1e-10)")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_4_fft_count():
    rows, ok = [], True
    for alpha, M, w in ((4, 8, 4), (16, 64, 16), (64, 128, 16)):
        L = coarsen(build_grid(Region(0, 0, M, M), M, M), alpha, w)
        r = int(round(alpha ** 0.5))
        assert L.Wx == L.Wy == r
        solver = AccFFTSolver(L.spec, alpha, w, mode="fft")
        solver(random_charges(M, M, max(4, M), seed=alpha))
        got = solver.fft_counts["shifted"]
        want = 2 * (r - 1) * (3 * r - 1)
        ok &= got == want
        rows.append(f"alpha={alpha}: {got} (formula {want})")
    ok &= rows[0].startswith("alpha=4: 10 ")
    record_criterion(4, ok, "; ".join(rows))
    assert ok


# ---------------------------------------------------------------- 5

def _best_time(fn, repeats=5):
    fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _share(solver, cg, repeats=3):
    solver(cg)
    lr0, sr0 = solver.times["long_range"], solver.times["short_range"]
    for _ in range(repeats):
        solver(cg)
    lr, sr = solver.times["long_range"] - lr0, solver.times["short_range"] - sr0
    return sr / (lr + sr)


def test_criterion_5_speed():
    cg = random_charges(1024, 1024, 200_000, seed=5)
    fine = FineFFTSolver(cg.spec)
    acc = AccFFTSolver(cg.spec, 16, mode=RunConfig().short_range)
    t_fine = _best_time(lambda: fine(cg))
    t_acc = _best_time(lambda: acc(cg))
    speedup = t_fine / t_acc
    share_fft = _share(AccFFTSolver(cg.spec, 16, mode="fft"), cg)
    share_direct = _share(AccFFTSolver(cg.spec, 16, mode="direct"), cg)
    ok_speed = speedup >= 2.0
    ok_share = share_fft < share_direct
    record_criterion(5, ok_speed and ok_share,
                     f"fine {t_fine:.3f}s vs accfft(a16, {acc.mode}) {t_acc:.3f}s: {speedup:.2f}x (need >= 2x) "
                     f"{'ok' if ok_speed else 'X'}; short-range share fft {share_fft:.2f} vs direct "
                     f"{share_direct:.2f} (need fft < direct) {'ok' if ok_share else 'X'}")
    assert ok_speed and ok_share


# ---------------------------------------------------------------- 6

def _fd(fun, v, h):
    num = np.zeros_like(v)
    for idx in np.ndindex(v.shape):
        vp, vm = v.copy(), v.copy()
        vp[idx] += h
        vm[idx] -= h
        num[idx] = (fun(vp) - fun(vm)) / (2 * h)
    return num


def test_criterion_6_gradients():
    t0 = time.perf_counter()
    worst_wa, worst_f = 0.0, 0.0
    for seed in range(3):
        nl = random_netlist(50, 60, seed=seed)
        a = nl.arrays()
        p = WAParams(1.5)
        gx, gy = wa_gradient(nl, None, p)
        num = _fd(lambda v: wa_wirelength(nl, (v[0], v[1]), p), np.stack([a.x, a.y]), 1e-3 * p.gamma)
        worst_wa = max(worst_wa, np.linalg.norm(np.stack([gx, gy]) - num) / np.linalg.norm(num))

        spec = build_grid(nl.region, 16, 16)
        for neutralize in (False, True):
            prob = PlacementProblem(nl, [], spec, DirectCellSolver(), neutralize=neutralize)
            v = prob.initial_positions()
            lam = 0.3 + seed
            g, _ = prob.gradient(v, lam, p)
            num = _fd(lambda vv: prob.gradient(vv, lam, p)[1].energy, v, 1e-4)
            worst_f = max(worst_f, np.linalg.norm(g - num) / np.linalg.norm(num))
    dt = time.perf_counter() - t0
    ok = worst_wa <= 1e-3 and worst_f <= 1e-3 and dt <= 60
    record_criterion(6, ok, f"WA gradient rel. error {worst_wa:.2e}, full gradient rel. error {worst_f:.2e} "
                            f"(bound 1e-3), {dt:.1f}s (bound 60s)")
    assert ok


# ---------------------------------------------------------------- 7 and 8

RUNS = {"fine-fft": dict(solver="fine-fft"), "a4": dict(solver="accfft", alpha=4),
        "a16": dict(solver="accfft", alpha=16), "a64": dict(solver="accfft", alpha=64)}


@pytest.fixture(scope="module")
def big_runs():
    nl = gen_synthetic(5000, 5500, seed=1)
    out = {}
    for name, kw in RUNS.items():
        _, rep = run_global_placement(nl, RunConfig(**kw))
        out[name] = rep
    return out


@pytest.mark.slow
def test_criterion_7_convergence(big_runs):
    r = big_runs
    conv = {k: r[k].converged and r[k].final_tau <= 0.10 and r[k].totals["iterations"] <= 3000
            for k in ("fine-fft", "a4", "a16")}
    gap = abs(r["a4"].final_hpwl - r["fine-fft"].final_hpwl) / r["fine-fft"].final_hpwl
    order = r["a16"].final_hpwl <= r["a64"].final_hpwl
    ok = all(conv.values()) and gap <= 0.05 and order
    desc = ", ".join(f"{k}: {r[k].totals['iterations']} it tau {r[k].final_tau:.3f} hpwl {r[k].final_hpwl:.0f}"
                     for k in RUNS)
    record_criterion(7, ok, f"{desc}; a4 vs fine gap {100 * gap:.2f}% (bound 5%); "
                            f"hpwl(a16) <= hpwl(a64): {order}")
    assert ok


@pytest.mark.slow
def test_criterion_8_iso_runtime(big_runs):
    fine = big_runs["fine-fft"].iterations
    acc = big_runs["a16"].iterations
    assert len(fine) > 100
    t = fine[100].wall_time
    seen = [rec for rec in acc if rec.wall_time <= t]
    a = seen[-1]
    ok = a.iter > 100 and a.tau < fine[100].tau
    record_criterion(8, ok, f"at {t:.1f}s fine-fft: 100 iterations, tau {fine[100].tau:.3f}; "
                            f"accfft(a16): {a.iter} iterations, tau {a.tau:.3f}")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_9_structure():
    rng = np.random.default_rng(909)
    fails = []

    cons = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 400))
        region = Region(0, 0, *rng.uniform(10, 200, 2))
        M, N = (int(2 ** rng.integers(2, 8)) for _ in range(2))
        spec = build_grid(region, M, N)
        cs = CellSet(rng.uniform(-5, region.x1, n), rng.uniform(-5, region.y1, n), rng.uniform(0.1, 9, n),
                     rng.uniform(0.1, 9, n), rng.integers(0, 3, n).astype(np.int8))
        total = clipped_area(cs, region).sum()
        dm = compute_density(cs, spec)
        q = to_charges(dm).q
        if total > 0:
            cons = max(cons, abs(dm.rho.sum() - total) / total, abs(q.sum() * spec.bin_area - total) / total)
    if cons > 1e-9:
        fails.append("conservation")

    resid, adj = 0.0, 0.0
    for alpha in (4, 16, 64):
        for M, N in ((64, 64), (128, 64)):
            L = coarsen(build_grid(Region(0, 0, M * rng.uniform(0.5, 2), N), M, N), alpha)
            st_ = build_projection(L)
            resid = max(resid, float(st_.residual.max()))
            for _ in range(5):
                qq = rng.standard_normal((M, N))
                xi = rng.standard_normal(L.frame_shape)
                lhs = float((project_charges(qq, st_) * xi).sum())
                rhs = float((qq * interpolate(xi, st_)).sum())
                adj = max(adj, abs(lhs - rhs) / (np.abs(project_charges(qq, st_) * xi).sum()))
    if resid > 1e-3:
        fails.append("projection residual")
    if adj > 1e-12:
        fails.append("adjointness")

    part_ok = True
    for M, N, alpha, w in ((8, 8, 4, 4), (16, 32, 4, 8), (64, 64, 16, 16), (128, 64, 16, 32), (128, 128, 64, 16)):
        plan = build_window_plan(coarsen(build_grid(Region(0, 0, M, N), M, N), alpha, w))
        cover = np.zeros((M, N), dtype=int)
        for wc in plan.classes:
            rows, cols = wc.owned_slices()
            for r_ in rows:
                for c_ in cols:
                    cover[np.ix_(r_, c_)] += 1
        part_ok &= bool(np.all(cover == 1))
    if not part_ok:
        fails.append("ownership partition")

    idem = True
    for _ in range(200):
        n = int(rng.integers(1, 200))
        region = Region(*rng.uniform(-50, 0, 2), *rng.uniform(1, 80, 2))
        x, y = rng.uniform(-200, 200, (2, n))
        w, h = rng.uniform(0.01, 1, (2, n)) * np.array([[region.width], [region.height]])
        a = clamp_to_region(x, y, w, h, region)
        b = clamp_to_region(*a, w, h, region)
        idem &= np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    if not idem:
        fails.append("clamp idempotence")

    ok = not fails
    record_criterion(9, ok, f"conservation {cons:.1e}, projection residual {resid:.1e}, adjointness {adj:.1e}, "
                            f"partition {part_ok}, clamp idempotent {idem}"
                            + ("" if ok else f"; failing: {', '.join(fails)}"))
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
