import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from accplace.netlist import Cell, CellKind, Net, Netlist, Pin, Region

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def write_fixture(d, nets_body=None, name="tiny"):
    """Hand-written 2-node Bookshelf design: a movable 4x8 at (0,0), terminal b 4x8 at (12,0)."""
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{name}.aux").write_text(f"RowBasedPlacement : {name}.nodes {name}.nets {name}.pl {name}.scl\n")
    (d / f"{name}.nodes").write_text(
        "UCLA nodes 1.0\n# comment\n\nNumNodes : 2\nNumTerminals : 1\n  a 4 8\n  b 4 8 terminal\n")
    if nets_body is None:
        nets_body = "NetDegree : 2 n0\n  a B : 0 0\n  b B : 0 0\n"
    (d / f"{name}.nets").write_text("UCLA nets 1.0\n\nNumNets : 1\nNumPins : 2\n" + nets_body)
    (d / f"{name}.pl").write_text("UCLA pl 1.0\n\na 0 0 : N\nb 12 0 : N /FIXED\n")
    (d / f"{name}.scl").write_text(
        "UCLA scl 1.0\n\nNumRows : 2\n"
        "CoreRow Horizontal\n  Coordinate : 0\n  Height : 8\n  Sitewidth : 1\n  Sitespacing : 1\n"
        "  Siteorient : 1\n  Sitesymmetry : 1\n  SubrowOrigin : 0 NumSites : 32\nEnd\n"
        "CoreRow Horizontal\n  Coordinate : 8\n  Height : 8\n  Sitewidth : 1\n  Sitespacing : 1\n"
        "  Siteorient : 1\n  Sitesymmetry : 1\n  SubrowOrigin : 0 NumSites : 32\nEnd\n")
    return d / f"{name}.aux"


@pytest.fixture
def tiny_aux(tmp_path):
    return write_fixture(tmp_path / "tiny")


def make_netlist(xs, ys, ws, hs, nets, region=(0.0, 0.0, 64.0, 64.0), fixed=()):
    cells = {}
    for i, (x, y, w, h) in enumerate(zip(xs, ys, ws, hs)):
        kind = CellKind.FIXED if i in fixed else CellKind.MOVABLE
        cells[f"c{i}"] = Cell(f"c{i}", float(w), float(h), kind, float(x), float(y))
    net_objs = [Net(f"n{k}", [Pin(f"c{i}", dx, dy) for i, dx, dy in pins]) for k, pins in enumerate(nets)]
    return Netlist(cells, net_objs, Region(*region))


def random_netlist(n, n_nets, seed, side=64.0, max_deg=5):
    rng = np.random.default_rng(seed)
    ws = rng.uniform(1, 4, n)
    hs = rng.uniform(1, 4, n)
    xs = rng.uniform(0, side - 4, n)
    ys = rng.uniform(0, side - 4, n)
    nets = []
    for _ in range(n_nets):
        deg = int(rng.integers(2, max_deg + 1))
        members = rng.choice(n, size=deg, replace=False)
        nets.append([(int(i), float(rng.uniform(0, ws[i])), float(rng.uniform(0, hs[i]))) for i in members])
    return make_netlist(xs, ys, ws, hs, nets, (0.0, 0.0, side, side))


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(n: int, ok: bool, detail: str) -> str:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
