"""Fine bin grid, exact-overlap density maps, overflow, fillers and charges.

Grid arrays are indexed ``[ix, iy]``: the first axis runs along x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netlist import Cell, CellKind, Netlist, Region

KIND_CODE = {CellKind.MOVABLE: 0, CellKind.FIXED: 1, CellKind.FILLER: 2}


def _pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    M: int
    N: int
    bin_w: float
    bin_h: float
    region: Region

    @property
    def bin_area(self) -> float:
        return self.bin_w * self.bin_h

    @property
    def pitch(self) -> float:
        """Mean bin side, the length scale for step bounds and gamma."""
        return 0.5 * (self.bin_w + self.bin_h)

    def centers(self):
        """Bin-center coordinates as two 1-D arrays (x, y)."""
        r = self.region
        return (r.x0 + (np.arange(self.M) + 0.5) * self.bin_w,
                r.y0 + (np.arange(self.N) + 0.5) * self.bin_h)


def build_grid(region: Region, M: int, N: int) -> GridSpec:
    if not (_pow2(M) and _pow2(N)):
        raise ValueError(f"grid dimensions must be powers of two, got {M}x{N}")
    if M < 4 or N < 4:
        raise ValueError("grid dimensions must be at least 4")
    return GridSpec(M, N, region.width / M, region.height / N, region)


@dataclass
class CellSet:
    """Struct-of-arrays view of placeable rectangles (lower-left positions)."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    h: np.ndarray
    kind: np.ndarray  # 0 movable, 1 fixed, 2 filler

    @classmethod
    def from_cells(cls, cells) -> "CellSet":
        cells = list(cells)
        return cls(np.array([c.x for c in cells], dtype=float),
                   np.array([c.y for c in cells], dtype=float),
                   np.array([c.width for c in cells], dtype=float),
                   np.array([c.height for c in cells], dtype=float),
                   np.array([KIND_CODE[c.kind] for c in cells], dtype=np.int8))

    @property
    def area(self) -> np.ndarray:
        return self.w * self.h

    def __len__(self):
        return len(self.x)


@dataclass
class DensityMap:
    rho: np.ndarray
    target: float
    spec: GridSpec
    movable: np.ndarray
    fixed: np.ndarray
    movable_area: float


@dataclass
class ChargeGrid:
    q: np.ndarray
    spec: GridSpec


def _corner_stencil(x, y, w, h, spec: GridSpec):
    """Lattice indices and weights representing each clipped rectangle.

    A rectangle's integral of any bin-wise constant map equals the signed
    sum of the map's summed-area function at its four corners, and that
    function is exactly bilinear inside each bin. Each rectangle thus maps
    to 16 weighted points on the (M+1) x (N+1) bin-corner lattice.
    """
    r = spec.region
    M, N = spec.M, spec.N
    n = len(x)
    idx = np.empty((n, 16), dtype=np.int64)
    wts = np.empty((n, 16))
    ux = (np.clip(np.stack([x, x + w]), r.x0, r.x1) - r.x0) / spec.bin_w  # (2, n)
    uy = (np.clip(np.stack([y, y + h]), r.y0, r.y1) - r.y0) / spec.bin_h
    ix = np.minimum(np.floor(ux).astype(np.int64), M - 1)
    iy = np.minimum(np.floor(uy).astype(np.int64), N - 1)
    fx, fy = ux - ix, uy - iy
    k = 0
    for a in (0, 1):
        for b in (0, 1):
            sign = 1.0 if a == b else -1.0
            for da, wa in ((0, 1 - fx[a]), (1, fx[a])):
                for db, wb in ((0, 1 - fy[b]), (1, fy[b])):
                    idx[:, k] = (ix[a] + da) * (N + 1) + iy[b] + db
                    wts[:, k] = sign * wa * wb
                    k += 1
    return idx, wts


def _rasterize(x, y, w, h, spec: GridSpec) -> np.ndarray:
    M, N = spec.M, spec.N
    if len(x) == 0:
        return np.zeros((M, N))
    idx, wts = _corner_stencil(x, y, w, h, spec)
    A = np.bincount(idx.ravel(), wts.ravel(), (M + 1) * (N + 1)).reshape(M + 1, N + 1)
    S = A[::-1, ::-1].cumsum(0).cumsum(1)[::-1, ::-1]
    return np.maximum(S[1:, 1:] * spec.bin_area, 0.0)


def integrate_over_cells(fmap: np.ndarray, x, y, w, h, spec: GridSpec) -> np.ndarray:
    """Integral of a bin-wise constant map over each (clipped) rectangle.

    This is the exact transpose of the rasterization: the result for a
    cell equals sum_b overlap_area(cell, b) * fmap[b]. Complex maps are
    allowed, which integrates two real components in one pass.
    """
    M, N = spec.M, spec.N
    F = np.zeros((M + 1, N + 1), dtype=np.result_type(fmap, float))
    F[1:, 1:] = fmap.cumsum(0).cumsum(1) * spec.bin_area
    idx, wts = _corner_stencil(x, y, w, h, spec)
    return (F.ravel()[idx] * wts).sum(axis=1)


def clipped_area(cs: CellSet, region: Region) -> np.ndarray:
    ow = np.clip(np.minimum(cs.x + cs.w, region.x1) - np.maximum(cs.x, region.x0), 0, None)
    oh = np.clip(np.minimum(cs.y + cs.h, region.y1) - np.maximum(cs.y, region.y0), 0, None)
    return ow * oh


def compute_density(cells, spec: GridSpec, target: float = 1.0, fixed_map: np.ndarray | None = None) -> DensityMap:
    """Distribute each rectangle's exact overlap area over the bins.

    ``cells`` is a CellSet or a sequence of Cell. A precomputed fixed-cell
    map may be passed to skip re-rasterizing static cells.
    """
    cs = cells if isinstance(cells, CellSet) else CellSet.from_cells(cells)
    fixed_mask = cs.kind == 1
    mov_mask = cs.kind == 0
    if fixed_map is None:
        fixed_map = _rasterize(cs.x[fixed_mask], cs.y[fixed_mask], cs.w[fixed_mask], cs.h[fixed_mask], spec)
    mov = _rasterize(cs.x[mov_mask], cs.y[mov_mask], cs.w[mov_mask], cs.h[mov_mask], spec)
    fill_mask = cs.kind == 2
    fill = _rasterize(cs.x[fill_mask], cs.y[fill_mask], cs.w[fill_mask], cs.h[fill_mask], spec)
    rho = mov + fill + fixed_map
    return DensityMap(rho, target, spec, mov, fixed_map, float(cs.area[mov_mask].sum()))


def compute_overflow(dm: DensityMap) -> float:
    """Normalized overflow of movable area.

    Bin capacity is the target density times the bin area not covered by
    fixed cells; fillers are whitespace placeholders and do not count.
    """
    if dm.movable_area <= 0:
        return 0.0
    cap = dm.target * np.clip(dm.spec.bin_area - dm.fixed, 0.0, None)
    return float(np.clip(dm.movable - cap, 0.0, None).sum() / dm.movable_area)


def to_charges(dm: DensityMap, spec: GridSpec | None = None) -> ChargeGrid:
    spec = spec or dm.spec
    return ChargeGrid(dm.rho / spec.bin_area, spec)


def filler_side(netlist: Netlist) -> float:
    widths = np.sort([c.width for c in netlist.cells.values() if c.kind == CellKind.MOVABLE])
    if len(widths) == 0:
        return netlist.region.row_height
    k = int(len(widths) * 0.1)
    mid = widths[k:len(widths) - k] if len(widths) - 2 * k > 0 else widths
    return float(mid.mean())


def insert_fillers(netlist: Netlist, rho_t: float, seed: int = 0) -> list[Cell]:
    """Square net-less fillers that bring total mobile area to rho_t x free area."""
    if not 0 < rho_t <= 1:
        raise ValueError("rho_t must be in (0, 1]")
    r = netlist.region
    all_cells = CellSet.from_cells(netlist.cells.values())
    fixed_area = float(clipped_area(all_cells, r)[all_cells.kind == 1].sum())
    movable_area = float(all_cells.area[all_cells.kind == 0].sum())
    need = max(0.0, rho_t * (r.area - fixed_area) - movable_area)
    side = min(filler_side(netlist), r.width, r.height)
    n = int(round(need / (side * side)))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(r.x0, r.x1 - side, n)
    ys = rng.uniform(r.y0, r.y1 - side, n)
    return [Cell(f"__filler{i}", side, side, CellKind.FILLER, float(xs[i]), float(ys[i])) for i in range(n)]


__all__ = ["GridSpec", "build_grid", "CellSet", "DensityMap", "ChargeGrid", "compute_density",
           "compute_overflow", "to_charges", "insert_fillers", "filler_side", "clipped_area",
           "integrate_over_cells"]
