"""HPWL, weighted-average (WA) smooth wirelength and its gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netlist import Netlist

LOG2E = 1.4426950408889634
# 2**f on [0, 1) as 1 + f*(A + (1-A)*f); minimax over A, max relative error 0.27%.
_FEXP_A = 0.6602


@dataclass(frozen=True)
class WAParams:
    gamma: float
    clamp_beta: float = 20.0
    clamp_active: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.clamp_beta > 0:
            raise ValueError("clamp_beta must be positive")


def fast_exp(x, p: WAParams):
    """Cheap exponential: 2**n times a quadratic in the fractional part.

    Relative error is below 0.3% everywhere, the result is continuous and
    nondecreasing in x. With ``p.clamp_active`` the value is capped at
    exp(clamp_beta), and arguments above clamp_beta return exactly that cap.
    """
    x = np.asarray(x, dtype=float)
    t = x * LOG2E
    n = np.floor(t)
    f = t - n
    val = np.ldexp(1.0 + f * (_FEXP_A + (1.0 - _FEXP_A) * f), n.astype(np.int64).clip(-1100, 1100))
    if p.clamp_active:
        cap = np.exp(p.clamp_beta)
        val = np.where(x > p.clamp_beta, cap, np.minimum(val, cap))
    return val


def _xy(netlist: Netlist, positions):
    """Return per-cell lower-left coordinate arrays in NetlistArrays order."""
    a = netlist.arrays()
    if positions is None:
        return a.x, a.y
    if isinstance(positions, dict):
        x = a.x.copy()
        y = a.y.copy()
        for cid, (px, py) in positions.items():
            i = a.index.get(cid)
            if i is not None:
                x[i], y[i] = px, py
        return x, y
    x, y = positions
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _pins(netlist: Netlist, positions):
    a = netlist.arrays()
    x, y = _xy(netlist, positions)
    return x[a.pin_cell] + a.pin_dx, y[a.pin_cell] + a.pin_dy


def hpwl(netlist: Netlist, positions=None) -> float:
    a = netlist.arrays()
    if len(a.net_ptr) < 2:
        return 0.0
    px, py = _pins(netlist, positions)
    starts = a.net_ptr[:-1]
    span = (np.maximum.reduceat(px, starts) - np.minimum.reduceat(px, starts)
            + np.maximum.reduceat(py, starts) - np.minimum.reduceat(py, starts))
    return float(span.sum())


def _wa_axis(coord, a, p: WAParams, need_grad: bool):
    """WA value per net and per-pin derivative for one axis."""
    starts = a.net_ptr[:-1]
    nid = a.pin_net
    hi = np.maximum.reduceat(coord, starts)[nid]
    lo = np.minimum.reduceat(coord, starts)[nid]
    g = p.gamma
    if p.clamp_active:
        # Arguments measured from the opposite extreme are nonnegative,
        # so the exponential cap engages only on very wide nets.
        ep = fast_exp((coord - lo) / g, p)
        em = fast_exp((hi - coord) / g, p)
        cap = np.exp(p.clamp_beta)
        dp = np.where(ep >= cap, 0.0, ep / g)
        dm = np.where(em >= cap, 0.0, -em / g)
    else:
        ep = np.exp((coord - hi) / g)
        em = np.exp((lo - coord) / g)
        dp = ep / g
        dm = -em / g
    nn = len(starts)
    sp = np.bincount(nid, ep, nn)
    tp = np.bincount(nid, coord * ep, nn)
    sm = np.bincount(nid, em, nn)
    tm = np.bincount(nid, coord * em, nn)
    wp, wm = tp / sp, tm / sm
    value = wp - wm
    if not need_grad:
        return value, None
    # d(T/S)/dx_j = e_j/S + e'_j (x_j - T/S)/S
    grad = (ep / sp[nid] + dp * (coord - wp[nid]) / sp[nid]
            - em / sm[nid] - dm * (coord - wm[nid]) / sm[nid])
    return value, grad


def wa_wirelength(netlist: Netlist, positions, p: WAParams) -> float:
    a = netlist.arrays()
    if len(a.net_ptr) < 2:
        return 0.0
    px, py = _pins(netlist, positions)
    vx, _ = _wa_axis(px, a, p, False)
    vy, _ = _wa_axis(py, a, p, False)
    return float(vx.sum() + vy.sum())


def wa_value_and_gradient(netlist: Netlist, positions, p: WAParams):
    """Total WA wirelength and per-cell gradient arrays (gx, gy).

    Fixed cells get zero gradient.
    """
    a = netlist.arrays()
    n = len(a.ids)
    if len(a.net_ptr) < 2:
        return 0.0, np.zeros(n), np.zeros(n)
    px, py = _pins(netlist, positions)
    vx, dx = _wa_axis(px, a, p, True)
    vy, dy = _wa_axis(py, a, p, True)
    gx = np.bincount(a.pin_cell, dx, n)
    gy = np.bincount(a.pin_cell, dy, n)
    gx[~a.movable] = 0.0
    gy[~a.movable] = 0.0
    return float(vx.sum() + vy.sum()), gx, gy


def wa_gradient(netlist: Netlist, positions, p: WAParams):
    """Per-cell WA gradient as arrays (gx, gy) in NetlistArrays order."""
    _, gx, gy = wa_value_and_gradient(netlist, positions, p)
    return gx, gy


__all__ = ["WAParams", "fast_exp", "hpwl", "wa_wirelength", "wa_gradient", "wa_value_and_gradient"]
