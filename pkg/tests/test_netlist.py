import numpy as np
import pytest
from hypothesis import given, strategies as st

from accplace.netlist import (BookshelfError, CellKind, gen_synthetic, netlist_equal, parse_bookshelf,
                              write_bookshelf, write_pl)
from conftest import write_fixture


def test_parse_two_node_fixture(tiny_aux):
    nl = parse_bookshelf(tiny_aux)
    assert len(nl.cells) == 2 and len(nl.nets) == 1
    a, b = nl.cells["a"], nl.cells["b"]
    assert (a.width, a.height, a.kind, a.x, a.y) == (4, 8, CellKind.MOVABLE, 0, 0)
    assert (b.kind, b.x, b.y) == (CellKind.FIXED, 12, 0)
    # center-relative (0, 0) becomes (2, 4) from the lower-left corner
    assert [(p.dx, p.dy) for p in nl.nets[0].pins] == [(2, 4), (2, 4)]
    r = nl.region
    assert (r.x0, r.y0, r.x1, r.y1, r.row_height) == (0, 0, 32, 16, 8)


def test_unknown_node_is_named(tmp_path):
    aux = write_fixture(tmp_path, "NetDegree : 2 n0\n  a B : 0 0\n  zz B : 0 0\n")
    with pytest.raises(BookshelfError, match="zz"):
        parse_bookshelf(aux)


def test_malformed_line_reports_file_and_line(tmp_path):
    aux = write_fixture(tmp_path)
    (tmp_path / "tiny.pl").write_text("UCLA pl 1.0\n\na zero 0 : N\n")
    with pytest.raises(BookshelfError, match=r"tiny\.pl:3"):
        parse_bookshelf(aux)


def test_missing_file(tmp_path):
    aux = write_fixture(tmp_path)
    (tmp_path / "tiny.scl").unlink()
    with pytest.raises((BookshelfError, FileNotFoundError)):
        parse_bookshelf(aux)


def test_synthetic_round_trip(tmp_path):
    nl = gen_synthetic(1000, 1100, seed=3)
    back = parse_bookshelf(write_bookshelf(nl, tmp_path))
    assert netlist_equal(nl, back)


def test_write_pl_format(tiny_aux, tmp_path):
    nl = parse_bookshelf(tiny_aux)
    out = tmp_path / "out.pl"
    write_pl(nl, {"a": (3, 5)}, out)
    lines = out.read_text().splitlines()
    assert "a 3 5 : N" in lines
    assert "b 12 0 : N /FIXED" in lines


def test_write_pl_empty_movable_set(tiny_aux, tmp_path):
    nl = parse_bookshelf(tiny_aux)
    del nl.cells["a"]
    nl.nets.clear()
    out = tmp_path / "fixed.pl"
    write_pl(nl, {}, out)
    body = [ln for ln in out.read_text().splitlines()[1:] if ln.strip()]
    assert body == ["b 12 0 : N /FIXED"]


def test_write_pl_requires_movable_positions(tiny_aux, tmp_path):
    nl = parse_bookshelf(tiny_aux)
    with pytest.raises(KeyError):
        write_pl(nl, {}, tmp_path / "x.pl")


@given(st.lists(st.tuples(st.floats(0, 1e4), st.floats(0, 1e4)), min_size=2, max_size=2))
def test_pl_positions_round_trip(tmp_path_factory, pos):
    d = tmp_path_factory.mktemp("rt")
    aux = write_fixture(d)
    nl = parse_bookshelf(aux)
    write_pl(nl, {"a": pos[0]}, d / "tiny.pl")
    back = parse_bookshelf(aux)
    assert abs(back.cells["a"].x - pos[0][0]) <= 1e-6
    assert abs(back.cells["a"].y - pos[0][1]) <= 1e-6


def test_gen_synthetic_byte_identical(tmp_path):
    a = write_bookshelf(gen_synthetic(2, 1, seed=7), tmp_path / "a", "s")
    b = write_bookshelf(gen_synthetic(2, 1, seed=7), tmp_path / "b", "s")
    for ext in (".aux", ".nodes", ".nets", ".pl", ".scl"):
        assert (a.parent / f"s{ext}").read_bytes() == (b.parent / f"s{ext}").read_bytes()


def test_gen_synthetic_utilization():
    nl = gen_synthetic(5000, 5500, seed=1)
    area = sum(c.area for c in nl.cells.values())
    assert area / nl.region.area <= 0.8
    assert all(1 <= c.width <= 8 and c.height == nl.region.row_height for c in nl.cells.values())
    assert all(2 <= len(n.pins) <= 6 for n in nl.nets)


def test_gen_synthetic_infeasible():
    with pytest.raises(ValueError, match="infeasible"):
        gen_synthetic(1, 1)


def test_movable_area_independent_of_order(tmp_path):
    nl = gen_synthetic(200, 150, seed=2)
    aux = write_bookshelf(nl, tmp_path)
    nodes = aux.with_suffix(".nodes")
    lines = nodes.read_text().splitlines()
    head, body = lines[:4], lines[4:]
    rng = np.random.default_rng(0)
    nodes.write_text("\n".join(head + [body[i] for i in rng.permutation(len(body))]) + "\n")
    back = parse_bookshelf(aux)
    assert sum(c.area for c in back.cells.values()) == pytest.approx(sum(c.area for c in nl.cells.values()),
                                                                     rel=1e-12)
