"""Circuit model, Bookshelf I/O and a synthetic netlist generator.

Pin offsets are stored relative to the cell's lower-left corner. Bookshelf
files give them relative to the cell center and are converted on read.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class CellKind(str, Enum):
    MOVABLE = "movable"
    FIXED = "fixed"
    FILLER = "filler"


@dataclass
class Cell:
    id: str
    width: float
    height: float
    kind: CellKind = CellKind.MOVABLE
    x: float = 0.0
    y: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"cell {self.id!r}: width and height must be positive")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass
class Pin:
    cell: str
    dx: float
    dy: float


@dataclass
class Net:
    id: str
    pins: list[Pin]

    def __post_init__(self):
        if not self.pins:
            raise ValueError(f"net {self.id!r} has no pins")


@dataclass(frozen=True)
class Region:
    x0: float
    y0: float
    x1: float
    y1: float
    row_height: float = 1.0

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("region must have positive extent")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass
class Netlist:
    cells: dict[str, Cell]
    nets: list[Net]
    region: Region
    name: str = "design"
    _arrays: "NetlistArrays | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for net in self.nets:
            for p in net.pins:
                if p.cell not in self.cells:
                    raise BookshelfError(f"net {net.id!r} references unknown node {p.cell!r}")

    def positions(self) -> dict[str, tuple[float, float]]:
        return {c.id: (c.x, c.y) for c in self.cells.values()}

    def arrays(self) -> "NetlistArrays":
        """Flat index arrays for vectorized evaluation (cached)."""
        if self._arrays is None:
            self._arrays = NetlistArrays.build(self)
        return self._arrays


@dataclass
class NetlistArrays:
    """Index-based view of a netlist.

    Cells are ordered as in ``Netlist.cells``. Pins are grouped by net
    (CSR layout through ``net_ptr``); degree-1 nets are dropped here since
    they contribute nothing to any wirelength quantity.
    """

    ids: list[str]
    index: dict[str, int]
    w: np.ndarray
    h: np.ndarray
    x: np.ndarray
    y: np.ndarray
    movable: np.ndarray  # bool mask
    pin_cell: np.ndarray
    pin_dx: np.ndarray
    pin_dy: np.ndarray
    net_ptr: np.ndarray
    pin_net: np.ndarray

    @classmethod
    def build(cls, nl: Netlist) -> "NetlistArrays":
        ids = list(nl.cells)
        index = {cid: i for i, cid in enumerate(ids)}
        cells = [nl.cells[i] for i in ids]
        w = np.array([c.width for c in cells], dtype=float)
        h = np.array([c.height for c in cells], dtype=float)
        x = np.array([c.x for c in cells], dtype=float)
        y = np.array([c.y for c in cells], dtype=float)
        movable = np.array([c.kind != CellKind.FIXED for c in cells], dtype=bool)
        pc, pdx, pdy, ptr = [], [], [], [0]
        for net in nl.nets:
            if len(net.pins) < 2:
                continue
            for p in net.pins:
                pc.append(index[p.cell])
                pdx.append(p.dx)
                pdy.append(p.dy)
            ptr.append(len(pc))
        net_ptr = np.array(ptr, dtype=np.int64)
        counts = np.diff(net_ptr)
        pin_net = np.repeat(np.arange(len(counts)), counts)
        return cls(ids, index, w, h, x, y, movable,
                   np.array(pc, dtype=np.int64), np.array(pdx, dtype=float),
                   np.array(pdy, dtype=float), net_ptr, pin_net)


class BookshelfError(ValueError):
    """Malformed or inconsistent Bookshelf input."""


# ---------------------------------------------------------------- parsing

def _lines(path: Path):
    """Yield (lineno, tokens) for non-empty, non-comment lines after the header."""
    if not path.is_file():
        raise BookshelfError(f"missing file: {path}")
    with open(path) as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("UCLA"):
                continue
            yield no, line.replace(":", " : ").split()


def _num(tok: str, path: Path, no: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise BookshelfError(f"{path}:{no}: expected a number, got {tok!r}") from None


def _read_aux(aux: Path) -> dict[str, Path]:
    if not aux.is_file():
        raise BookshelfError(f"missing file: {aux}")
    files: dict[str, Path] = {}
    for no, toks in _lines(aux):
        if ":" not in toks:
            raise BookshelfError(f"{aux}:{no}: expected '<kind> : files...'")
        for name in toks[toks.index(":") + 1:]:
            files[Path(name).suffix.lower()] = aux.parent / name
    for ext in (".nodes", ".nets", ".pl", ".scl"):
        if ext not in files:
            raise BookshelfError(f"{aux}: no {ext} file listed")
        if not files[ext].is_file():
            raise BookshelfError(f"missing file: {files[ext]}")
    if ".wts" in files:
        log.warning("ignoring net weights file %s", files[".wts"])
    return files


def _read_nodes(path: Path) -> dict[str, Cell]:
    cells: dict[str, Cell] = {}
    for no, toks in _lines(path):
        if toks[0] in ("NumNodes", "NumTerminals"):
            continue
        if len(toks) < 3:
            raise BookshelfError(f"{path}:{no}: expected 'name width height [terminal]'")
        name = toks[0]
        if name in cells:
            raise BookshelfError(f"{path}:{no}: duplicate node {name!r}")
        w, h = _num(toks[1], path, no), _num(toks[2], path, no)
        kind = CellKind.FIXED if len(toks) > 3 and toks[3].startswith("terminal") else CellKind.MOVABLE
        try:
            cells[name] = Cell(name, w, h, kind)
        except ValueError as e:
            raise BookshelfError(f"{path}:{no}: {e}") from None
    return cells


def _read_nets(path: Path, cells: dict[str, Cell]) -> list[Net]:
    nets: list[Net] = []
    pending: tuple[str, int, int] | None = None  # (name, expected degree, lineno)
    pins: list[Pin] = []

    def close():
        if pending is None:
            return
        name, deg, no = pending
        if len(pins) != deg:
            raise BookshelfError(f"{path}:{no}: net {name!r} declares {deg} pins, found {len(pins)}")
        nets.append(Net(name, list(pins)))

    for no, toks in _lines(path):
        if toks[0] in ("NumNets", "NumPins"):
            continue
        if toks[0] == "NetDegree":
            close()
            pins = []
            if len(toks) < 3:
                raise BookshelfError(f"{path}:{no}: malformed NetDegree line")
            deg = int(_num(toks[2], path, no))
            name = toks[3] if len(toks) > 3 else f"net{len(nets)}"
            pending = (name, deg, no)
            continue
        if pending is None:
            raise BookshelfError(f"{path}:{no}: pin line outside a net")
        node = toks[0]
        if node not in cells:
            raise BookshelfError(f"{path}:{no}: pin references unknown node {node!r}")
        c = cells[node]
        dx = dy = 0.0
        if ":" in toks:
            k = toks.index(":")
            if len(toks) < k + 3:
                raise BookshelfError(f"{path}:{no}: malformed pin offset")
            dx, dy = _num(toks[k + 1], path, no), _num(toks[k + 2], path, no)
        pins.append(Pin(node, dx + c.width / 2, dy + c.height / 2))
    close()
    return nets


def _read_pl(path: Path, cells: dict[str, Cell]) -> None:
    for no, toks in _lines(path):
        if len(toks) < 3:
            raise BookshelfError(f"{path}:{no}: expected 'name x y : orient'")
        name = toks[0]
        if name not in cells:
            raise BookshelfError(f"{path}:{no}: placement for unknown node {name!r}")
        c = cells[name]
        c.x, c.y = _num(toks[1], path, no), _num(toks[2], path, no)
        if any(t.startswith("/FIXED") for t in toks[3:]):
            c.kind = CellKind.FIXED


def _read_scl(path: Path) -> Region:
    rows = []
    cur: dict[str, float] = {}
    for no, toks in _lines(path):
        key = toks[0]
        if key == "CoreRow":
            cur = {}
        elif key == "End":
            if not {"Coordinate", "Height", "SubrowOrigin", "NumSites"} <= cur.keys():
                raise BookshelfError(f"{path}:{no}: incomplete row definition")
            rows.append(cur)
        elif key in ("Coordinate", "Height", "Sitewidth", "Sitespacing"):
            cur[key] = _num(toks[-1], path, no)
        elif key == "SubrowOrigin":
            cur["SubrowOrigin"] = _num(toks[2], path, no)
            if "NumSites" in toks:
                cur["NumSites"] = _num(toks[toks.index("NumSites") + 2], path, no)
        elif key == "NumSites":
            cur["NumSites"] = _num(toks[-1], path, no)
    if not rows:
        raise BookshelfError(f"{path}: no rows defined")
    x0 = min(r["SubrowOrigin"] for r in rows)
    x1 = max(r["SubrowOrigin"] + r["NumSites"] * r.get("Sitespacing", r.get("Sitewidth", 1.0)) for r in rows)
    y0 = min(r["Coordinate"] for r in rows)
    y1 = max(r["Coordinate"] + r["Height"] for r in rows)
    return Region(x0, y0, x1, y1, rows[0]["Height"])


def parse_bookshelf(aux_path) -> Netlist:
    aux = Path(aux_path)
    files = _read_aux(aux)
    cells = _read_nodes(files[".nodes"])
    nets = _read_nets(files[".nets"], cells)
    _read_pl(files[".pl"], cells)
    region = _read_scl(files[".scl"])
    return Netlist(cells, nets, region, name=aux.stem)


def apply_pl(netlist: Netlist, pl_path) -> Netlist:
    """Copy of ``netlist`` with positions (and /FIXED flags) read from a .pl file."""
    cells = {k: Cell(c.id, c.width, c.height, c.kind, c.x, c.y) for k, c in netlist.cells.items()}
    _read_pl(Path(pl_path), cells)
    return Netlist(cells, netlist.nets, netlist.region, name=netlist.name)


# ---------------------------------------------------------------- writing

def _fmt(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def write_pl(netlist: Netlist, positions: dict[str, tuple[float, float]], out) -> None:
    """Write a Bookshelf .pl. Fixed cells keep their own coordinates."""
    lines = ["UCLA pl 1.0", ""]
    for c in netlist.cells.values():
        if c.kind == CellKind.FILLER:
            continue
        if c.kind == CellKind.FIXED:
            lines.append(f"{c.id} {_fmt(c.x)} {_fmt(c.y)} : N /FIXED")
        else:
            if c.id not in positions:
                raise KeyError(f"no position for movable cell {c.id!r}")
            x, y = positions[c.id]
            lines.append(f"{c.id} {_fmt(x)} {_fmt(y)} : N")
    Path(out).write_text("\n".join(lines) + "\n")


def write_bookshelf(netlist: Netlist, out_dir, name: str | None = None) -> Path:
    """Write .aux/.nodes/.nets/.pl/.scl; returns the .aux path."""
    name = name or netlist.name
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    cells = [c for c in netlist.cells.values() if c.kind != CellKind.FILLER]
    n_term = sum(c.kind == CellKind.FIXED for c in cells)

    nodes = ["UCLA nodes 1.0", "", f"NumNodes : {len(cells)}", f"NumTerminals : {n_term}"]
    for c in cells:
        tail = " terminal" if c.kind == CellKind.FIXED else ""
        nodes.append(f"{c.id} {_fmt(c.width)} {_fmt(c.height)}{tail}")

    npins = sum(len(n.pins) for n in netlist.nets)
    nets = ["UCLA nets 1.0", "", f"NumNets : {len(netlist.nets)}", f"NumPins : {npins}"]
    for net in netlist.nets:
        nets.append(f"NetDegree : {len(net.pins)} {net.id}")
        for p in net.pins:
            c = netlist.cells[p.cell]
            nets.append(f"  {p.cell} B : {_fmt(p.dx - c.width / 2)} {_fmt(p.dy - c.height / 2)}")

    r = netlist.region
    nrows = int(round(r.height / r.row_height))
    scl = ["UCLA scl 1.0", "", f"NumRows : {nrows}"]
    for i in range(nrows):
        scl += ["CoreRow Horizontal",
                f"  Coordinate : {_fmt(r.y0 + i * r.row_height)}",
                f"  Height : {_fmt(r.row_height)}",
                "  Sitewidth : 1", "  Sitespacing : 1", "  Siteorient : 1", "  Sitesymmetry : 1",
                f"  SubrowOrigin : {_fmt(r.x0)} NumSites : {_fmt(r.width)}",
                "End"]

    (d / f"{name}.nodes").write_text("\n".join(nodes) + "\n")
    (d / f"{name}.nets").write_text("\n".join(nets) + "\n")
    (d / f"{name}.scl").write_text("\n".join(scl) + "\n")
    write_pl(netlist, netlist.positions(), d / f"{name}.pl")
    aux = d / f"{name}.aux"
    aux.write_text(f"RowBasedPlacement : {name}.nodes {name}.nets {name}.pl {name}.scl\n")
    return aux


# ---------------------------------------------------------------- synthetic

def gen_synthetic(n_cells: int, n_nets: int, region: Region | None = None, seed: int = 0,
                  utilization: float = 0.7, max_width: int = 8) -> Netlist:
    """Random standard-cell netlist.

    Widths are uniform integers in [1, max_width] sites, height is one row.
    Each net picks a degree uniformly in 2..6 and distinct cells uniformly
    at random. Without an explicit region, a square region sized for the
    requested utilization is used. Initial positions cluster around the
    region center (Gaussian, sigma = 5% of the region side), the usual
    starting point after a wirelength-only initial placement.
    """
    if n_cells < 2:
        raise ValueError("infeasible: need at least 2 cells")
    rng = np.random.default_rng(seed)
    widths = rng.integers(1, max_width + 1, size=n_cells).astype(float)
    row_h = region.row_height if region is not None else 1.0
    area = float(widths.sum() * row_h)
    if region is None:
        side = float(np.ceil(np.sqrt(area / utilization)))
        region = Region(0.0, 0.0, side, side, row_h)
    if area > 0.8 * region.area:
        raise ValueError(f"infeasible: cell area {area:g} exceeds 0.8 x region area {region.area:g}")

    cx, cy = (region.x0 + region.x1) / 2, (region.y0 + region.y1) / 2
    sx, sy = 0.05 * region.width, 0.05 * region.height
    xs = np.clip(cx + sx * rng.standard_normal(n_cells) - widths / 2, region.x0, region.x1 - widths)
    ys = np.clip(cy + sy * rng.standard_normal(n_cells) - row_h / 2, region.y0, region.y1 - row_h)
    cells = {}
    for i in range(n_cells):
        cid = f"o{i}"
        cells[cid] = Cell(cid, widths[i], row_h, CellKind.MOVABLE,
                          float(np.round(xs[i], 3)), float(np.round(ys[i], 3)))

    nets = []
    for k in range(n_nets):
        deg = int(rng.integers(2, 7))
        members = rng.choice(n_cells, size=min(deg, n_cells), replace=False)
        pins = []
        for i in members:
            c = cells[f"o{i}"]
            pins.append(Pin(c.id, c.width / 2, c.height / 2))
        nets.append(Net(f"n{k}", pins))
    return Netlist(cells, nets, region, name="synthetic")


def netlist_equal(a: Netlist, b: Netlist, tol: float = 1e-6) -> bool:
    """Structural equality up to numeric text precision."""
    if a.cells.keys() != b.cells.keys() or len(a.nets) != len(b.nets):
        return False
    for k, ca in a.cells.items():
        cb = b.cells[k]
        if ca.kind != cb.kind:
            return False
        if max(abs(ca.width - cb.width), abs(ca.height - cb.height),
               abs(ca.x - cb.x), abs(ca.y - cb.y)) > tol:
            return False
    for na, nb in zip(a.nets, b.nets):
        if na.id != nb.id or len(na.pins) != len(nb.pins):
            return False
        for pa, pb in zip(na.pins, nb.pins):
            if pa.cell != pb.cell or abs(pa.dx - pb.dx) > tol or abs(pa.dy - pb.dy) > tol:
                return False
    ra, rb = a.region, b.region
    return all(abs(u - v) <= tol for u, v in zip(
        (ra.x0, ra.y0, ra.x1, ra.y1, ra.row_height), (rb.x0, rb.y0, rb.x1, rb.y1, rb.row_height)))


__all__ = ["Cell", "CellKind", "Pin", "Net", "Region", "Netlist", "NetlistArrays",
           "BookshelfError", "parse_bookshelf", "apply_pl", "write_pl", "write_bookshelf",
           "gen_synthetic", "netlist_equal"]
