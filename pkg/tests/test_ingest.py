import pytest

from tradenet.errors import MalformedRow, NegativeValue, NonPositiveGdp, UnknownColumn
from tradenet.ingest import (
    TradeFormat,
    TradeRecord,
    build_year_networks,
    five_year_blocks,
    mirror_discrepancies,
    parse_gdp_file,
    parse_trade_file,
    read_edge_list,
    strength_series,
    symmetrize,
    write_edge_list,
)
from tradenet.network import strength

from hypothesis import given, strategies as st


def write(tmp_path, text, name="trade.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


HEADER = "reporter,partner,year,export,import\n"


def rec(r, p, y, e, i):
    return TradeRecord(r, p, y, e, i)


def eq1_brute(flows):
    """Link weight straight from the four named flows; absent counts as 0."""
    keys = ("exp_ij", "exp_ji", "imp_ij", "imp_ji")
    return sum(flows.get(k) or 0.0 for k in keys) / 2


def test_parse_row(tmp_path):
    recs = parse_trade_file(write(tmp_path, HEADER + "USA,CAN,2000,100.0,95.0\n"))
    assert len(recs) == 1
    r = recs[0]
    assert (r.reporter, r.partner, r.year, r.export, r.import_) == ("USA", "CAN", 2000, 100.0, 95.0)
    assert r.line == 2


@pytest.mark.parametrize("row, exc", [
    ("USA,USA,2000,1,1", MalformedRow),
    ("USA,CAN,2000,-5,1", NegativeValue),
    ("USA,CAN,20x0,1,1", MalformedRow),
    ("USA,CAN,2000,abc,1", MalformedRow),
    ("USA,CAN,2000,1", MalformedRow),
])
def test_parse_errors(tmp_path, row, exc):
    with pytest.raises(exc) as info:
        parse_trade_file(write(tmp_path, HEADER + row + "\n"))
    assert info.value.line == 2


def test_duplicate_row(tmp_path):
    with pytest.raises(MalformedRow, match="line 3"):
        parse_trade_file(write(tmp_path, HEADER + "A,B,2000,1,1\nA,B,2000,2,2\n"))


def test_absent_is_not_zero(tmp_path):
    r = parse_trade_file(write(tmp_path, HEADER + "A,B,2000,,0\n"))[0]
    assert r.export is None and r.import_ == 0.0


def test_unknown_column(tmp_path):
    with pytest.raises(UnknownColumn):
        parse_trade_file(write(tmp_path, "a,b,c\n1,2,3\n"))


def test_column_mapping_adapter(tmp_path):
    text = "numa,acra,acrb,year,expab,impab,extra\n2,USA,CAN,1990,-9,4.0,x\n"
    fmt = TradeFormat.from_spec("reporter=acra,partner=acrb,export=expab,import=impab", missing=["-9"])
    r = parse_trade_file(write(tmp_path, text), fmt)[0]
    assert (r.reporter, r.partner, r.export, r.import_) == ("USA", "CAN", None, 4.0)


def test_year_range(tmp_path):
    fmt = TradeFormat(year_range=(1999, 1999))
    recs = parse_trade_file(write(tmp_path, HEADER + "A,B,1999,1,1\nA,B,2000,1,1\n"), fmt)
    assert [r.year for r in recs] == [1999]


def test_symmetrize_eq1():
    recs = [rec("i", "j", 2000, 10, 20), rec("j", "i", 2000, 20, 10)]
    assert symmetrize(recs) == [("i", "j", 30.0)]


def test_symmetrize_all_absent_or_zero():
    assert symmetrize([rec("i", "j", 2000, None, 0.0), rec("j", "i", 2000, 0.0, None)]) == []


def test_symmetrize_single_export():
    out = symmetrize([rec("i", "j", 2000, 4.0, None)])
    assert out == [("i", "j", eq1_brute({"exp_ij": 4.0}))]
    assert out[0][2] == 2.0


flow = st.one_of(st.none(), st.floats(0, 1e4))


@given(flow, flow, flow, flow)
def test_symmetrize_role_swap(e_ij, e_ji, i_ij, i_ji):
    fwd = [rec("a", "b", 1, e_ij, i_ij), rec("b", "a", 1, e_ji, i_ji)]
    rev = [rec("b", "a", 1, e_ij, i_ij), rec("a", "b", 1, e_ji, i_ji)]
    expected = eq1_brute({"exp_ij": e_ij, "exp_ji": e_ji, "imp_ij": i_ij, "imp_ji": i_ji})
    for recs in (fwd, rev):
        out = symmetrize(recs)
        if expected > 0:
            assert out[0][2] == pytest.approx(expected)
        else:
            assert out == []


def test_weight_conservation_with_both_sides_reported():
    recs = [rec("a", "b", 1, 3.0, 4.0), rec("b", "a", 1, 4.5, 2.5),
            rec("a", "c", 1, 1.0, 0.5), rec("c", "a", 1, 0.5, 1.5)]
    total = sum(w for _, _, w in symmetrize(recs))
    assert total == pytest.approx(0.5 * sum(r.export + r.import_ for r in recs))


def test_mirror_discrepancies_counted():
    recs = [rec("a", "b", 1, 10.0, 5.0), rec("b", "a", 1, 5.0, 9.0)]
    # exp_ab=10 vs imp_ba=9 differ; exp_ba=5 vs imp_ab=5 agree
    assert mirror_discrepancies(recs) == 1


def test_build_year_networks():
    recs = [rec("A", "B", 1999, 1, 1), rec("A", "C", 2000, 2, 0), rec("B", "C", 2000, 0, 0)]
    nets = build_year_networks(recs)
    assert nets.years == [1999, 2000]
    assert nets[1999].n_nodes == 2
    # B has no non-zero link in 2000
    assert nets[2000].labels == ("A", "C")
    assert nets.labels == ("A", "B", "C")
    assert strength_series(nets)["A"] == {1999: 1.0, 2000: 1.0}


def test_empty_records():
    assert len(build_year_networks([])) == 0


def test_gdp_file(tmp_path):
    series = parse_gdp_file(write(tmp_path, "country,year,gdp\nIND,1990,3.2e5\nIND,1991,\n", "gdp.csv"))
    assert series[0].country == "IND" and series[0].entries == {1990: 3.2e5}


@pytest.mark.parametrize("rows, exc", [
    ("IND,1990,0\n", NonPositiveGdp),
    ("IND,1990,1\nIND,1990,2\n", MalformedRow),
])
def test_gdp_errors(tmp_path, rows, exc):
    with pytest.raises(exc):
        parse_gdp_file(write(tmp_path, "country,year,gdp\n" + rows, "gdp.csv"))


def test_five_year_blocks():
    blocks = five_year_blocks(range(1948, 2001))
    assert len(blocks) == 10
    assert blocks[(1951, 1955)] == [1951, 1952, 1953, 1954, 1955]
    assert (1996, 2000) in blocks


def test_edge_list_round_trip(tmp_path, triangle):
    p = tmp_path / "e.csv"
    write_edge_list(triangle, p, labelled=False)
    back = read_edge_list(p)
    assert list(back.edges()) == list(triangle.edges())
    assert strength(back).tolist() == [4.0, 3.0, 5.0]
