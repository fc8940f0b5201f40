"""Coulomb vector kernel, pairwise oracle and exact fine-grid FFT field."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .density import ChargeGrid, GridSpec


@dataclass
class VectorKernel:
    """Kernel samples on integer bin offsets.

    ``hx[i, j]`` holds the x component for offset (i - ox, j - oy) where
    (ox, oy) = ``origin``. For a kernel covering a full M x N grid the
    offsets run over -(M-1)..M-1 and -(N-1)..N-1.
    """

    hx: np.ndarray
    hy: np.ndarray
    k_e: float
    pitch: tuple[float, float]
    origin: tuple[int, int]


def kernel_values(dx, dy, k_e: float = 1.0):
    """h(d) = k_e d / |d|^3 with h(0) = 0; broadcasting over dx, dy."""
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    r2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(r2 > 0, k_e / (r2 * np.sqrt(r2)), 0.0)
    return dx * s, dy * s


def build_kernel(spec: GridSpec, k_e: float = 1.0, pitch: tuple[float, float] | None = None) -> VectorKernel:
    bw, bh = pitch or (spec.bin_w, spec.bin_h)
    ix = np.arange(-(spec.M - 1), spec.M)
    iy = np.arange(-(spec.N - 1), spec.N)
    hx, hy = kernel_values(ix[:, None] * bw, iy[None, :] * bh, k_e)
    return VectorKernel(hx, hy, k_e, (bw, bh), (spec.M - 1, spec.N - 1))


def direct_field(src_pos, src_q, eval_pos, k_e: float = 1.0, chunk: int = 2048):
    """Exact pairwise field at ``eval_pos`` from point charges.

    Sources coinciding with an evaluation point are skipped. Returns an
    (n_eval, 2) array.
    """
    sp = np.asarray(src_pos, dtype=float).reshape(-1, 2)
    sq = np.asarray(src_q, dtype=float).ravel()
    ep = np.asarray(eval_pos, dtype=float).reshape(-1, 2)
    keep = sq != 0
    sp, sq = sp[keep], sq[keep]
    out = np.zeros((len(ep), 2))
    if len(sp) == 0:
        return out
    # bound temporaries to roughly chunk * 2048 pairs
    step = max(1, (chunk * 2048) // max(len(sp), 1))
    for a in range(0, len(ep), step):
        e = ep[a:a + step]
        dx = e[:, 0:1] - sp[None, :, 0]
        dy = e[:, 1:2] - sp[None, :, 1]
        hx, hy = kernel_values(dx, dy, k_e)
        out[a:a + step, 0] = hx @ sq
        out[a:a + step, 1] = hy @ sq
    return out


def direct_potential(src_pos, src_q, eval_pos, k_e: float = 1.0, chunk: int = 2048):
    """Pairwise potential k_e * sum q / r at ``eval_pos``; coincident pairs skipped.

    Its negative gradient is ``direct_field``.
    """
    sp = np.asarray(src_pos, dtype=float).reshape(-1, 2)
    sq = np.asarray(src_q, dtype=float).ravel()
    ep = np.asarray(eval_pos, dtype=float).reshape(-1, 2)
    out = np.zeros(len(ep))
    if len(sp) == 0:
        return out
    step = max(1, (chunk * 2048) // max(len(sp), 1))
    for a in range(0, len(ep), step):
        e = ep[a:a + step]
        r = np.hypot(e[:, 0:1] - sp[None, :, 0], e[:, 1:2] - sp[None, :, 1])
        with np.errstate(divide="ignore"):
            inv = np.where(r > 0, k_e / r, 0.0)
        out[a:a + step] = inv @ sq
    return out


def _log_y_plus_r(x, y, r, tiny):
    # ln(y + r) without cancellation for y < 0, where it equals 2 ln|x| - ln(r - y)
    ax = np.maximum(np.abs(x), tiny)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(y >= 0, np.log(np.maximum(y + r, tiny)), 2.0 * np.log(ax) - np.log(np.maximum(r - y, tiny)))


def rect_field_potential(rects, sigma, eval_pos, k_e: float = 1.0):
    """Field and potential of uniformly charged rectangles, in closed form.

    ``rects`` is (k, 4) as (x0, y0, x1, y1); ``sigma`` the charge per unit
    area of each. Uses the corner sums of
    F(x, y) = x ln(y + r) + y ln(x + r), whose mixed derivative is 1/r.
    The field diverges logarithmically on a rectangle's edge.
    """
    R = np.asarray(rects, dtype=float).reshape(-1, 4)
    sg = np.broadcast_to(np.asarray(sigma, dtype=float), (len(R),))
    ep = np.asarray(eval_pos, dtype=float).reshape(-1, 2)
    xi = np.zeros((len(ep), 2))
    phi = np.zeros(len(ep))
    if len(R) == 0:
        return xi, phi
    scale = max(float(np.abs(R).max()), float(np.abs(ep).max()) if len(ep) else 0.0, 1.0)
    tiny = 1e-300
    for (x0, y0, x1, y1), sk in zip(R, sg):
        for xs, sx in ((x1, 1.0), (x0, -1.0)):
            for ys, sy in ((y1, 1.0), (y0, -1.0)):
                x = xs - ep[:, 0]
                y = ys - ep[:, 1]
                r = np.hypot(x, y)
                ly = _log_y_plus_r(x, y, r, tiny * scale)
                lx = _log_y_plus_r(y, x, r, tiny * scale)
                s = sx * sy * sk * k_e
                xi[:, 0] += s * ly
                xi[:, 1] += s * lx
                phi += s * (np.where(x == 0, 0.0, x * ly) + np.where(y == 0, 0.0, y * lx))
    return xi, phi


@dataclass
class FieldMap:
    xi_x: np.ndarray
    xi_y: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.stack([self.xi_x, self.xi_y], axis=-1)


def grid_direct_field(cg: ChargeGrid, k_e: float = 1.0) -> FieldMap:
    """Oracle: pairwise sum over nonzero bins, evaluated at every bin center.

    Each source adds its charge times a shifted slice of the tabulated
    kernel; O(K^2) work with no transforms involved.
    """
    spec = cg.spec
    M, N = spec.M, spec.N
    k = build_kernel(spec, k_e)
    H = k.hx + 1j * k.hy
    acc = np.zeros((M, N), dtype=complex)
    for lx, ly in zip(*np.nonzero(cg.q)):
        acc += cg.q[lx, ly] * H[M - 1 - lx:2 * M - 1 - lx, N - 1 - ly:2 * N - 1 - ly]
    return FieldMap(acc.real.copy(), acc.imag.copy())


def packed_spectrum(hx: np.ndarray, hy: np.ndarray, origin, shape, workers=None) -> np.ndarray:
    """FFT of hx + i*hy laid out for circular convolution on ``shape``.

    Offset d lands at index d mod shape; offsets are taken from ``origin``.
    """
    P, Q = shape
    buf = np.zeros(shape, dtype=complex)
    ox, oy = origin
    ix = (np.arange(hx.shape[0]) - ox) % P
    iy = (np.arange(hx.shape[1]) - oy) % Q
    buf[np.ix_(ix, iy)] = hx + 1j * hy
    return sfft.fft2(buf, workers=workers)


@dataclass
class FFTConvolver:
    """Linear convolution of an M x N real map with a packed vector kernel.

    One forward FFT of the zero-padded charges and one inverse FFT give both
    field components (real part x, imaginary part y).
    """

    shape: tuple[int, int]
    spectrum: np.ndarray
    workers: int | None = None
    fft_count: int = field(default=0)

    @classmethod
    def from_kernel(cls, kernel: VectorKernel, M: int, N: int, workers=None) -> "FFTConvolver":
        # any length >= 2M-1 avoids wrap-around; 2M for power-of-two grids
        shape = (sfft.next_fast_len(2 * M - 1), sfft.next_fast_len(2 * N - 1))
        return cls(shape, packed_spectrum(kernel.hx, kernel.hy, kernel.origin, shape, workers), workers)

    def __call__(self, q: np.ndarray) -> np.ndarray:
        """Complex field map xi_x + i*xi_y, same shape as ``q``."""
        M, N = q.shape
        buf = np.zeros(self.shape)
        buf[:M, :N] = q
        out = sfft.ifft2(sfft.fft2(buf, workers=self.workers) * self.spectrum, workers=self.workers)
        self.fft_count += 2
        return out[:M, :N]


class FineFFTSolver:
    """Cached fine-grid convolution solver for one GridSpec."""

    def __init__(self, spec: GridSpec, k_e: float = 1.0, workers=None):
        self.spec = spec
        self.kernel = build_kernel(spec, k_e)
        self.conv = FFTConvolver.from_kernel(self.kernel, spec.M, spec.N, workers)

    @property
    def fft_count(self) -> int:
        return self.conv.fft_count

    def __call__(self, cg: ChargeGrid) -> FieldMap:
        z = self.conv(cg.q)
        return FieldMap(z.real.copy(), z.imag.copy())


def fft_field_fine(cg: ChargeGrid, kernel: VectorKernel | None = None, workers=None) -> FieldMap:
    spec = cg.spec
    kernel = kernel or build_kernel(spec)
    z = FFTConvolver.from_kernel(kernel, spec.M, spec.N, workers)(cg.q)
    return FieldMap(z.real.copy(), z.imag.copy())


__all__ = ["VectorKernel", "kernel_values", "build_kernel", "direct_field", "direct_potential", "rect_field_potential",
           "FieldMap",
           "grid_direct_field", "packed_spectrum", "FFTConvolver", "FineFFTSolver", "fft_field_fine"]
