"""Field-solver benchmark: accuracy against the pairwise oracle and timing."""

from __future__ import annotations

import time

import numpy as np

from .accfft import AccFFTSolver, shifted_window_fft_count
from .density import ChargeGrid, build_grid
from .field import FineFFTSolver, grid_direct_field
from .netlist import Region

BENCH_MODES = ("direct", "fine-fft", "accfft")


def random_charges(M: int, N: int, count: int, seed: int = 0, region: Region | None = None) -> ChargeGrid:
    """``count`` distinct random bins with charges uniform in (0, 1]."""
    region = region or Region(0.0, 0.0, float(M), float(N))
    spec = build_grid(region, M, N)
    rng = np.random.default_rng(seed)
    count = min(count, M * N)
    flat = rng.choice(M * N, size=count, replace=False)
    q = np.zeros(M * N)
    q[flat] = 1.0 - rng.random(count)
    return ChargeGrid(q.reshape(M, N), spec)


def rms_rel(fx, fy, rx, ry, mask=None) -> float:
    """RMS relative error sqrt(sum|e|^2 / sum|ref|^2), optionally over a mask."""
    ex, ey = fx - rx, fy - ry
    if mask is not None:
        ex, ey, rx, ry = ex[mask], ey[mask], rx[mask], ry[mask]
    den = float((rx * rx + ry * ry).sum())
    return float(np.sqrt((ex * ex + ey * ey).sum() / den)) if den > 0 else 0.0


def _time_calls(fn, repeats: int):
    out = fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def field_bench(grid: int = 64, alpha: int = 4, charges: int = 200, seed: int = 1,
                modes=BENCH_MODES, window: int | None = None, short_range=("fft", "direct"),
                oracle_limit: int = 256, repeats: int = 3, threads: int | None = None) -> dict:
    """Per-mode wall time (best of ``repeats`` after a warm-up), FFT counts
    per evaluation, RMS error against the pairwise oracle and, for accfft,
    the short-range share of field time.
    """
    M = N = grid
    cg = random_charges(M, N, charges, seed)
    spec = cg.spec
    use_oracle = max(M, N) <= oracle_limit
    ref = None
    results: dict = {"grid": [M, N], "alpha": alpha, "charges": int(np.count_nonzero(cg.q)), "seed": seed,
                     "oracle": use_oracle, "modes": {}}

    if use_oracle:
        t0 = time.perf_counter()
        ref = grid_direct_field(cg)
        t = time.perf_counter() - t0
        if "direct" in modes:
            results["modes"]["direct"] = {"time": t, "fft_counts": {}, "rms_error": 0.0}
    elif "direct" in modes:
        results["modes"]["direct"] = {"skipped": f"grid above oracle limit {oracle_limit}"}

    if "fine-fft" in modes:
        solver = FineFFTSolver(spec, workers=threads)
        fm, t = _time_calls(lambda: solver(cg), repeats)
        results["modes"]["fine-fft"] = {
            "time": t, "fft_counts": {"fine": 2},
            "rms_error": rms_rel(fm.xi_x, fm.xi_y, ref.xi_x, ref.xi_y) if ref is not None else None}

    if "accfft" in modes:
        for sr in short_range:
            t0 = time.perf_counter()
            solver = AccFFTSolver(spec, alpha, window, mode=sr, workers=threads)
            build = time.perf_counter() - t0
            solver(cg)
            counts_before = dict(solver.fft_counts)
            times_before = dict(solver.times)
            best = float("inf")
            fm = None
            for _ in range(repeats):
                t0 = time.perf_counter()
                fm = solver(cg)
                best = min(best, time.perf_counter() - t0)
            n = max(repeats, 1)
            counts = {k: (solver.fft_counts[k] - counts_before[k]) // n for k in solver.fft_counts}
            lr = solver.times["long_range"] - times_before["long_range"]
            sr_t = solver.times["short_range"] - times_before["short_range"]
            lay = solver.layout
            results["modes"][f"accfft/{sr}"] = {
                "time": best, "build_time": build, "fft_counts": counts,
                "shifted_formula": shifted_window_fft_count(lay.Wx, lay.Wy),
                "window": lay.w, "coarse": [lay.m, lay.n],
                "short_range_share": sr_t / (lr + sr_t) if lr + sr_t > 0 else 0.0,
                "rms_error": rms_rel(fm.xi_x, fm.xi_y, ref.xi_x, ref.xi_y) if ref is not None else None}

    fine = results["modes"].get("fine-fft", {}).get("time")
    if fine:
        for k, r in results["modes"].items():
            if k.startswith("accfft") and r.get("time"):
                r["speedup_vs_fine"] = fine / r["time"]
    return results


def format_table(res: dict) -> str:
    lines = [f"grid {res['grid'][0]}x{res['grid'][1]}  alpha {res['alpha']}  charges {res['charges']}",
             f"{'mode':<16}{'time [s]':>12}{'rms err':>12}{'sr share':>10}{'speedup':>9}  fft counts"]
    for k, r in res["modes"].items():
        if "skipped" in r:
            lines.append(f"{k:<16}  skipped: {r['skipped']}")
            continue
        err = "-" if r.get("rms_error") is None else f"{r['rms_error']:.2e}"
        share = f"{r['short_range_share']:.2f}" if "short_range_share" in r else "-"
        sp = f"{r['speedup_vs_fine']:.2f}" if "speedup_vs_fine" in r else "-"
        counts = " ".join(f"{a}={b}" for a, b in r["fft_counts"].items())
        lines.append(f"{k:<16}{r['time']:>12.4f}{err:>12}{share:>10}{sp:>9}  {counts}")
    return "\n".join(lines)


__all__ = ["BENCH_MODES", "random_charges", "rms_rel", "field_bench", "format_table"]
