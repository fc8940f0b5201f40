"""Nesterov placement loop pieces: objective gradient, step, schedules, clamping."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .density import CellSet, ChargeGrid, DensityMap, GridSpec, compute_density, integrate_over_cells, to_charges
from .field import direct_field, direct_potential, rect_field_potential
from .netlist import Cell, Netlist, Region
from .wirelength import WAParams, wa_value_and_gradient

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Non-finite values inside the optimization loop."""


@dataclass(frozen=True)
class ScheduleConfig:
    """Penalty, smoothing, step and clamp schedule constants."""

    mu_base: float = 1.05
    mu_min: float = 0.95
    mu_max: float = 1.1
    # exponent is mu_offset - dHPWL / dH_ref
    mu_offset: float = 1.0
    href_abs: float = 3.5e5
    href_design: float = 1e8
    gamma_base: float = 8.0
    clamp_beta: float = 20.0
    clamp_iter_frac: float = 0.3
    clamp_tau: float = 0.6
    step_min: float = 1e-4
    step_max: float = 1e2
    backtrack_ratio: float = 0.1
    # without an objective, retry while the new step estimate drops below
    # lipschitz_accept times the step used
    lipschitz_accept: float = 0.95
    max_backtracks: int = 10
    momentum: bool = True
    # reset momentum when the new gradient opposes the last major step
    restart: bool = True
    precondition: bool = False


@dataclass
class PlacerState:
    v: np.ndarray  # (2, n) reference solution
    u: np.ndarray  # (2, n) major solution
    a_k: float
    step: float
    lam: float
    gamma: float
    tau: float
    iter: int
    hpwl_prev: float
    grad: np.ndarray
    f: float | None = None
    pitch: float = 1.0
    n_backtracks: int = 0

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.a_k < 1:
            raise ValueError("a_k must be >= 1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


def init_lambda(gW, gN) -> float:
    """Ratio of summed per-cell L1 norms of the wirelength and density gradients."""
    num = float(np.abs(np.asarray(gW)).sum())
    den = float(np.abs(np.asarray(gN)).sum())
    if not den > 0 or not math.isfinite(den):
        log.warning("density gradient vanishes at the initial placement; using lambda = 1")
        return 1.0
    lam = num / den
    if not lam > 0 or not math.isfinite(lam):
        log.warning("degenerate initial lambda %r; using lambda = 1", lam)
        return 1.0
    return lam


def mu_factor(d_hpwl: float, h_ref: float, cfg: ScheduleConfig = ScheduleConfig()) -> float:
    e = cfg.mu_offset - d_hpwl / h_ref
    if cfg.mu_base == 1.0:
        return float(np.clip(1.0, cfg.mu_min, cfg.mu_max))
    # the clip range is reached long before overflow
    lim = math.log(max(cfg.mu_max, 1.0 / cfg.mu_min)) / abs(math.log(cfg.mu_base)) + 1.0
    return float(np.clip(cfg.mu_base ** min(max(e, -lim), lim), cfg.mu_min, cfg.mu_max))


def hpwl_reference(hpwl0: float, cfg: ScheduleConfig = ScheduleConfig()) -> float:
    """dH_ref: the absolute constant, scaled down for designs below 1e8 HPWL."""
    if hpwl0 <= 0:
        return cfg.href_abs
    return cfg.href_abs * min(1.0, hpwl0 / cfg.href_design)


def gamma_for(tau: float, pitch: float, cfg: ScheduleConfig = ScheduleConfig()) -> float:
    return cfg.gamma_base * pitch * 10.0 ** ((tau - 0.1) * 20.0 / 9.0 - 1.0)


def clamp_active(it: int, budget: int, tau: float, cfg: ScheduleConfig = ScheduleConfig()) -> bool:
    """Exponential clamp runs in early iterations: before 30% of the budget and while tau >= 0.6."""
    return it < cfg.clamp_iter_frac * budget and tau >= cfg.clamp_tau


def update_schedules(state: PlacerState, hpwl_now: float, tau: float, h_ref: float,
                     cfg: ScheduleConfig = ScheduleConfig()) -> PlacerState:
    mu = mu_factor(hpwl_now - state.hpwl_prev, h_ref, cfg)
    return replace(state, lam=state.lam * mu, gamma=gamma_for(tau, state.pitch, cfg), tau=tau, hpwl_prev=hpwl_now)


def clamp_to_region(x, y, w, h, region: Region):
    """Translate rectangles that leave the region flush against its boundary.

    Rectangles wider than the region are pinned to the low edge.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    nx = np.maximum(np.minimum(x, region.x1 - w), region.x0)
    ny = np.maximum(np.minimum(y, region.y1 - h), region.y0)
    return nx, ny


def _clamp_step(step: float, g: np.ndarray, pitch: float, cfg: ScheduleConfig) -> float:
    # bound the largest single-coordinate move to [step_min, step_max] pitches
    gmax = float(np.abs(g).max()) if g.size else 0.0
    if gmax > 0:
        step = min(max(step, cfg.step_min * pitch / gmax), cfg.step_max * pitch / gmax)
    return step


def initial_step(v: np.ndarray, g: np.ndarray, grad_fn, pitch: float, project=None,
                 cfg: ScheduleConfig = ScheduleConfig()) -> float:
    """Inverse-Lipschitz estimate from a trial move of one pitch."""
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite gradient at the initial placement")
    gmax = float(np.abs(g).max()) if g.size else 0.0
    if gmax == 0:
        return pitch
    trial = v - (pitch / gmax) * g
    if project is not None:
        trial = project(trial)
    g2, _ = grad_fn(trial)
    if not np.all(np.isfinite(g2)):
        raise NumericalError("non-finite gradient during the initial step estimate")
    dg = float(np.linalg.norm(g2 - g))
    dv = float(np.linalg.norm(trial - v))
    step = dv / dg if dg > 0 and dv > 0 else pitch / gmax
    return _clamp_step(step, g, pitch, cfg)


def nesterov_step(state: PlacerState, grad_fn: Callable, project=None,
                  cfg: ScheduleConfig = ScheduleConfig()) -> PlacerState:
    """One accelerated step.

    ``grad_fn(v)`` returns ``(gradient, objective or None)``. When objectives
    are available a rise of more than 10% triggers one halving of the step.
    Without them the step is retried with the fresh inverse-Lipschitz
    estimate while that estimate is clearly smaller than the step used.
    """
    g = state.grad
    if not np.all(np.isfinite(g)):
        raise NumericalError(f"non-finite gradient at iteration {state.iter}")
    a_next = (1.0 + math.sqrt(4.0 * state.a_k * state.a_k + 1.0)) / 2.0
    coef = (state.a_k - 1.0) / a_next if cfg.momentum else 0.0
    step = state.step
    backtracks = 0
    while True:
        u_new = state.v - step * g
        if project is not None:
            u_new = project(u_new)
        v_new = u_new + coef * (u_new - state.u)
        if project is not None:
            v_new = project(v_new)
        g_new, f_new = grad_fn(v_new)
        if not np.all(np.isfinite(g_new)):
            raise NumericalError(f"non-finite gradient at iteration {state.iter + 1}")
        dv = float(np.linalg.norm(v_new - state.v))
        dg = float(np.linalg.norm(g_new - g))
        est = dv / dg if dg > 0 and dv > 0 else step
        est = _clamp_step(est, g_new, state.pitch, cfg)
        if f_new is not None and state.f is not None:
            if backtracks == 0 and f_new - state.f > cfg.backtrack_ratio * abs(state.f):
                step *= 0.5
                backtracks += 1
                continue
        elif est < cfg.lipschitz_accept * step and backtracks < cfg.max_backtracks:
            step = est
            backtracks += 1
            continue
        break
    if cfg.restart and float(np.vdot(g_new, u_new - state.u)) > 0:
        a_next = 1.0
    return replace(state, v=v_new, u=u_new, a_k=a_next, step=est, grad=g_new, f=f_new,
                   iter=state.iter + 1, n_backtracks=state.n_backtracks + backtracks)


class DirectCellSolver:
    """Pairwise point-charge interaction between cell centers (ground truth).

    Charges are cell areas. Unlike the binned solvers it also returns the
    interaction energy, so the objective is available for backtracking and
    finite-difference checks.
    """

    kind = "direct"

    def __init__(self, k_e: float = 1.0):
        self.k_e = k_e
        self.fft_counts: dict[str, int] = {}

    def forces(self, cx, cy, q, movers: np.ndarray, bg_rects=None, bg_sigma=None):
        """Field times charge at each mover, plus the total energy.

        Optional background: uniformly charged rectangles (x0, y0, x1, y1)
        with densities ``bg_sigma``. They act on every point charge and enter
        the energy, up to their constant self-energy, but never move.
        """
        pos = np.stack([cx, cy], axis=1)
        xi = direct_field(pos, q, pos[movers], self.k_e)
        phi = direct_potential(pos, q, pos, self.k_e)
        energy = 0.5 * float(q @ phi)
        if bg_rects is not None and len(bg_rects):
            bxi, bphi = rect_field_potential(bg_rects, bg_sigma, pos, self.k_e)
            xi = xi + bxi[movers]
            energy += float(q @ bphi)
        return q[movers, None] * xi, energy


@dataclass
class GradientInfo:
    wa: float
    energy: float | None
    field_time: float
    density: DensityMap


class PlacementProblem:
    """Objective assembly over optimized objects (movable cells, then fillers).

    Positions are (2, n) lower-left coordinates. ``solver`` is either a
    DirectCellSolver or a callable mapping a ChargeGrid to a FieldMap.
    """

    def __init__(self, netlist: Netlist, fillers: list[Cell], spec: GridSpec, solver, target: float = 1.0,
                 neutralize: bool = True):
        self.netlist = netlist
        self.fillers = list(fillers)
        self.spec = spec
        self.solver = solver
        self.target = target
        a = netlist.arrays()
        self.arrays = a
        self.mov_idx = np.nonzero(a.movable)[0]
        fix_idx = np.nonzero(~a.movable)[0]
        nf = len(self.fillers)
        self.n_mov = len(self.mov_idx)
        self.w = np.concatenate([a.w[self.mov_idx], [c.width for c in self.fillers]]).astype(float)
        self.h = np.concatenate([a.h[self.mov_idx], [c.height for c in self.fillers]]).astype(float)
        self.kind = np.concatenate([np.zeros(self.n_mov, np.int8), np.full(nf, 2, np.int8)])
        self.fixed = CellSet(a.x[fix_idx], a.y[fix_idx], a.w[fix_idx], a.h[fix_idx],
                             np.ones(len(fix_idx), np.int8))
        self.fixed_map = compute_density(self.fixed, spec, target).fixed
        self.degree = np.concatenate([np.bincount(a.pin_cell, minlength=len(a.ids))[self.mov_idx],
                                      np.zeros(nf)]).astype(float)
        self.area = self.w * self.h
        self.level = 0.0
        self._bg_rects = None
        self.background = self._background() if neutralize else None

    def _background(self) -> np.ndarray:
        """Uniform negative charge over the free area with the total mobile charge.

        Subtracting it removes the mean density, so the target-uniform state
        is field-free and cells are not driven onto the region boundary.
        Returned in ChargeGrid units (area per bin over bin area).
        """
        ba = self.spec.bin_area
        free = np.clip(ba - self.fixed_map, 0.0, None)
        total_free = float(free.sum())
        if total_free <= 0:
            return np.zeros_like(free)
        level = float(self.area.sum()) / total_free
        self.level = level
        return (self.fixed_map + level * free) / ba

    def _background_rects(self):
        """The grid background as uniform rectangles for the direct solver.

        Fixed cells cancel against their own background share, so what
        remains is -level over the region plus +level over each fixed cell
        (clipped to the region; overlapping fixed cells are counted twice).
        """
        if self._bg_rects is None:
            r = self.spec.region
            fx = self.fixed
            x0 = np.clip(fx.x, r.x0, r.x1)
            x1 = np.clip(fx.x + fx.w, r.x0, r.x1)
            y0 = np.clip(fx.y, r.y0, r.y1)
            y1 = np.clip(fx.y + fx.h, r.y0, r.y1)
            keep = (x1 > x0) & (y1 > y0)
            rects = np.concatenate([[[r.x0, r.y0, r.x1, r.y1]],
                                    np.stack([x0, y0, x1, y1], axis=1)[keep]])
            sigma = np.concatenate([[-self.level], np.full(int(keep.sum()), self.level)])
            self._bg_rects = (rects, sigma)
        return self._bg_rects

    @property
    def n(self) -> int:
        return len(self.w)

    def initial_positions(self) -> np.ndarray:
        a = self.arrays
        return np.stack([np.concatenate([a.x[self.mov_idx], [c.x for c in self.fillers]]),
                         np.concatenate([a.y[self.mov_idx], [c.y for c in self.fillers]])]).astype(float)

    def project(self, v: np.ndarray) -> np.ndarray:
        x, y = clamp_to_region(v[0], v[1], self.w, self.h, self.spec.region)
        return np.stack([x, y])

    def cell_xy(self, v: np.ndarray):
        """Netlist-order coordinate arrays with movable cells taken from ``v``."""
        a = self.arrays
        x = a.x.copy()
        y = a.y.copy()
        x[self.mov_idx] = v[0, :self.n_mov]
        y[self.mov_idx] = v[1, :self.n_mov]
        return x, y

    def cellset(self, v: np.ndarray) -> CellSet:
        return CellSet(v[0], v[1], self.w, self.h, self.kind)

    def density(self, v: np.ndarray) -> DensityMap:
        return compute_density(self.cellset(v), self.spec, self.target, self.fixed_map)

    def wirelength(self, v: np.ndarray, p: WAParams):
        """WA value and gradient on optimized objects (fillers get zero)."""
        val, gx, gy = wa_value_and_gradient(self.netlist, self.cell_xy(v), p)
        g = np.zeros((2, self.n))
        g[0, :self.n_mov] = gx[self.mov_idx]
        g[1, :self.n_mov] = gy[self.mov_idx]
        return val, g

    def density_gradient(self, v: np.ndarray, dm: DensityMap | None = None):
        """Gradient of the density energy, its value if known, and field-solve time.

        The gradient is minus the field integrated over each cell, so a
        descent step moves cells toward lower density.
        """
        if isinstance(self.solver, DirectCellSolver):
            cx, cy, q = v[0] + self.w / 2, v[1] + self.h / 2, self.area
            rects = sigma = None
            if self.background is None:
                # fixed cells repel as point charges
                fx = self.fixed
                cx = np.concatenate([cx, fx.x + fx.w / 2])
                cy = np.concatenate([cy, fx.y + fx.h / 2])
                q = np.concatenate([q, fx.area])
            else:
                rects, sigma = self._background_rects()
            t0 = time.perf_counter()
            f, energy = self.solver.forces(cx, cy, q, np.arange(self.n), rects, sigma)
            dt = time.perf_counter() - t0
            return -f.T, energy, dt
        dm = dm if dm is not None else self.density(v)
        cg = to_charges(dm, self.spec)
        if self.background is not None:
            cg = ChargeGrid(cg.q - self.background, self.spec)
        t0 = time.perf_counter()
        fm = self.solver(cg)
        dt = time.perf_counter() - t0
        # q_i * mean(xi) over the cell is the integral of xi over the cell
        z = integrate_over_cells(fm.xi_x + 1j * fm.xi_y, v[0], v[1], self.w, self.h, self.spec)
        return -np.stack([z.real, z.imag]), None, dt

    def preconditioner(self, lam: float) -> np.ndarray:
        return np.maximum(1.0, self.degree + lam * self.area)

    def gradient(self, v: np.ndarray, lam: float, p: WAParams):
        """Raw gradient of W + lambda * N and bookkeeping."""
        dm = self.density(v)
        wa, gW = self.wirelength(v, p)
        gN, energy, dt = self.density_gradient(v, dm)
        g = gW + lam * gN
        f = wa + lam * energy if energy is not None else None
        return g, GradientInfo(wa, f, dt, dm)


def gradient(problem: PlacementProblem, state: PlacerState, p: WAParams) -> np.ndarray:
    g, _ = problem.gradient(state.v, state.lam, p)
    return g


__all__ = ["NumericalError", "ScheduleConfig", "PlacerState", "init_lambda", "mu_factor", "hpwl_reference",
           "gamma_for", "clamp_active", "update_schedules", "clamp_to_region", "initial_step", "nesterov_step",
           "DirectCellSolver", "GradientInfo", "PlacementProblem", "gradient"]
