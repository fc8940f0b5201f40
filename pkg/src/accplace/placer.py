"""Global placement driver: configuration, main loop and run report."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .accfft import AccFFTSolver
from .density import build_grid, compute_overflow, insert_fillers
from .field import FineFFTSolver
from .netlist import Netlist
from .optimizer import (DirectCellSolver, PlacementProblem, PlacerState, ScheduleConfig, clamp_active,
                        gamma_for, hpwl_reference, init_lambda, initial_step, nesterov_step, update_schedules)
from .wirelength import WAParams, hpwl

log = logging.getLogger(__name__)

SOLVERS = ("direct", "fine-fft", "accfft")
SHORT_RANGE_MODES = ("fft", "direct")
REPORT_SCHEMA = "accplace.run-report/1"


@dataclass
class RunConfig:
    grid: tuple[int, int] = (1024, 1024)
    alpha: int = 16
    window: int | None = None
    target_density: float = 1.0
    tau_min: float = 0.10
    solver: str = "accfft"
    short_range: str = "direct"
    seed: int = 0
    max_iters: int = 3000
    threads: int | None = None
    k_e: float = 1.0
    lambda0: float | None = None
    fillers: bool = True
    neutralize: bool = True
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)

    def __post_init__(self):
        M, N = self.grid
        for d in (M, N):
            if d < 4 or d & (d - 1):
                raise ValueError(f"grid dimensions must be powers of two >= 4, got {M}x{N}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {', '.join(SOLVERS)}")
        if self.short_range not in SHORT_RANGE_MODES:
            raise ValueError(f"unknown short-range mode {self.short_range!r}")
        if not 0 < self.target_density <= 1:
            raise ValueError("target density must be in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.solver == "accfft":
            c = int(round(self.alpha ** 0.5))
            if c * c != self.alpha or c < 2:
                raise ValueError(f"alpha must be a perfect square >= 4, got {self.alpha}")
            if M % c or N % c:
                raise ValueError(f"sqrt(alpha)={c} must divide the grid {M}x{N}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d


@dataclass
class IterRecord:
    iter: int
    tau: float
    hpwl: float
    wa: float
    lam: float
    gamma: float
    step: float
    field_time: float
    wall_time: float
    fft: dict[str, int]


@dataclass
class RunReport:
    config: dict
    design: dict
    iterations: list[IterRecord]
    totals: dict
    final_hpwl: float
    final_tau: float
    converged: bool

    def to_dict(self) -> dict:
        return {"schema": REPORT_SCHEMA, "config": self.config, "design": self.design,
                "iterations": [asdict(r) for r in self.iterations], "totals": self.totals,
                "final_hpwl": self.final_hpwl, "final_tau": self.final_tau, "converged": self.converged}

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def make_solver(config: RunConfig, spec):
    if config.solver == "direct":
        return DirectCellSolver(config.k_e)
    if config.solver == "fine-fft":
        return FineFFTSolver(spec, config.k_e, workers=config.threads)
    return AccFFTSolver(spec, config.alpha, config.window, mode=config.short_range, k_e=config.k_e,
                        workers=config.threads)


def fft_counts(solver) -> dict[str, int]:
    if isinstance(solver, AccFFTSolver):
        return dict(solver.fft_counts)
    if isinstance(solver, FineFFTSolver):
        return {"fine": solver.fft_count}
    return {}


def _delta(now: dict[str, int], before: dict[str, int]) -> dict[str, int]:
    return {k: now[k] - before.get(k, 0) for k in now}


def break_ties(v: np.ndarray, n_mov: int, pitch: float, seed: int) -> np.ndarray:
    """Spread movable cells that share an exact start position.

    Identical cells at one point receive identical gradients forever; a
    seeded offset within half a bin pitch lets the density force act.
    """
    xy = v[:, :n_mov].T
    _, inv, counts = np.unique(xy, axis=0, return_inverse=True, return_counts=True)
    dup = counts[inv.ravel()] > 1
    if not dup.any():
        return v
    out = v.copy()
    rng = np.random.default_rng(seed)
    out[:, :n_mov][:, dup] += rng.uniform(-0.5 * pitch, 0.5 * pitch, (2, int(dup.sum())))
    return out


def run_global_placement(netlist: Netlist, config: RunConfig,
                         on_iteration: Callable | None = None):
    """Run the placement loop; returns (positions by cell id, RunReport).

    ``on_iteration(it, problem, v)`` is called after every iteration, for
    snapshots. Non-convergence within the cap is reported, not raised.
    """
    sched = config.schedule
    t_start = time.perf_counter()
    M, N = config.grid
    spec = build_grid(netlist.region, M, N)
    fillers = insert_fillers(netlist, config.target_density, config.seed) if config.fillers else []
    solver = make_solver(config, spec)
    problem = PlacementProblem(netlist, fillers, spec, solver, config.target_density, config.neutralize)
    pitch = spec.pitch

    clock = {"field": 0.0}
    last = {}
    params = {"lam": 1.0, "wa": None}

    def grad_fn(v):
        g, info = problem.gradient(v, params["lam"], params["wa"])
        clock["field"] += info.field_time
        last["info"] = info
        if sched.precondition:
            g = g / problem.preconditioner(params["lam"])
        return g, info.energy

    v0 = problem.project(break_ties(problem.initial_positions(), problem.n_mov, spec.pitch, config.seed))
    records: list[IterRecord] = []
    dm = problem.density(v0)
    tau = compute_overflow(dm)
    hp = hpwl(netlist, problem.cell_xy(v0))
    h_ref = hpwl_reference(hp, sched)
    gamma = gamma_for(tau, pitch, sched)
    params["wa"] = WAParams(gamma, sched.clamp_beta, clamp_active(0, config.max_iters, tau, sched))

    # iteration 0: initial lambda, gradient and step estimate
    counts0 = fft_counts(solver)
    wa0, gW = problem.wirelength(v0, params["wa"])
    gN, _, dt = problem.density_gradient(v0, dm)
    clock["field"] += dt
    lam = config.lambda0 if config.lambda0 is not None else init_lambda(gW, gN)
    params["lam"] = lam
    g0, f0 = grad_fn(v0)
    step = initial_step(v0, g0, grad_fn, pitch, problem.project, sched)
    state = PlacerState(v=v0, u=v0.copy(), a_k=1.0, step=step, lam=lam, gamma=gamma, tau=tau, iter=0,
                        hpwl_prev=hp, grad=g0, f=f0, pitch=pitch)
    records.append(IterRecord(0, tau, hp, wa0, lam, gamma, step, clock["field"],
                              time.perf_counter() - t_start, _delta(fft_counts(solver), {})))
    log.info("start: cells=%d fillers=%d tau=%.4f hpwl=%.6g lambda=%.4g", problem.n_mov, len(fillers), tau, hp, lam)

    # the stopping test follows an iteration, so at least one always runs
    converged = False
    it = 0
    while not converged and it < config.max_iters:
        it += 1
        f_before = clock["field"]
        counts_before = fft_counts(solver)
        state = nesterov_step(state, grad_fn, problem.project, sched)
        info = last["info"]
        tau = compute_overflow(info.density)
        hp = hpwl(netlist, problem.cell_xy(state.v))
        records.append(IterRecord(it, tau, hp, info.wa, state.lam, state.gamma, state.step,
                                  clock["field"] - f_before, time.perf_counter() - t_start,
                                  _delta(fft_counts(solver), counts_before)))
        if on_iteration is not None:
            on_iteration(it, problem, state.v)
        if it % 50 == 0:
            log.info("iter %d: tau=%.4f hpwl=%.6g lambda=%.4g gamma=%.4g", it, tau, hp, state.lam, state.gamma)
        if tau < config.tau_min:
            converged = True
            break
        state = update_schedules(state, hp, tau, h_ref, sched)
        params["lam"] = state.lam
        params["wa"] = WAParams(state.gamma, sched.clamp_beta, clamp_active(it, config.max_iters, tau, sched))

    x, y = problem.cell_xy(state.v)
    ids = problem.arrays.ids
    positions = {cid: (float(x[i]), float(y[i])) for i, cid in enumerate(ids)}
    total_time = time.perf_counter() - t_start
    totals_fft: dict[str, int] = {}
    for r in records:
        for k, n in r.fft.items():
            totals_fft[k] = totals_fft.get(k, 0) + n
    totals = {"iterations": it, "total_time": total_time,
              "field_time": float(sum(r.field_time for r in records)), "fft_counts": totals_fft,
              "backtracks": state.n_backtracks}
    design = {"name": netlist.name, "cells": len(netlist.cells), "movable": problem.n_mov,
              "nets": len(netlist.nets), "fillers": len(fillers)}
    report = RunReport(config.to_dict(), design, records, totals, records[-1].hpwl, records[-1].tau, converged)
    return positions, report


__all__ = ["RunConfig", "IterRecord", "RunReport", "run_global_placement", "break_ties", "make_solver", "fft_counts",
           "SOLVERS", "SHORT_RANGE_MODES", "REPORT_SCHEMA"]
