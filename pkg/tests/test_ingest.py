"""Branch table parsing, cleaning filters, and kind/voltage classification."""

import math

import pytest

from gridparams.ingest import (
    CSV_HEADER,
    DEFAULT_RATING_BOUNDS,
    BranchKind,
    BranchRecord,
    ParseError,
    RejectReason,
    VoltageClass,
    assign_voltage_class,
    classify_branch,
    filter_valid,
    is_transformer,
    parse_branch_csv,
    parse_matpower_case,
    serialize_branch_csv,
    voltage_class_table,
)

GOOD_ROW = "t1,1,2,115,13.8,0.002,0.05,60,1.0,100"


def _rec(**kw):
    base = dict(
        id="b1",
        from_bus=1,
        to_bus=2,
        from_kv=115.0,
        to_kv=115.0,
        r_pu=0.01,
        x_pu=0.1,
        mva_rating=100.0,
        tap_ratio=0.0,
        system_mva_base=100.0,
    )
    base.update(kw)
    return BranchRecord(**base)


# -------------------------------------------------------------- CSV parsing


def test_parse_single_row():
    text = ",".join(CSV_HEADER) + "\n" + GOOD_ROW + "\n"
    (rec,) = parse_branch_csv(text)
    assert rec.id == "t1"
    assert rec.from_bus == 1 and rec.to_bus == 2
    assert rec.from_kv == 115.0 and rec.to_kv == 13.8
    assert rec.r_pu == 0.002 and rec.x_pu == 0.05
    assert rec.mva_rating == 60.0
    assert rec.tap_ratio == 1.0
    assert rec.system_mva_base == 100.0


def test_parse_header_only():
    assert parse_branch_csv(",".join(CSV_HEADER) + "\n") == []


def test_parse_accepts_bytes():
    text = ",".join(CSV_HEADER) + "\n" + GOOD_ROW + "\n"
    assert parse_branch_csv(text.encode()) == parse_branch_csv(text)


def test_parse_column_order_free():
    cols = list(CSV_HEADER)
    cols.reverse()
    row = dict(zip(CSV_HEADER, GOOD_ROW.split(",")))
    text = ",".join(cols) + "\n" + ",".join(row[c] for c in cols) + "\n"
    (rec,) = parse_branch_csv(text)
    assert rec == parse_branch_csv(",".join(CSV_HEADER) + "\n" + GOOD_ROW + "\n")[0]


def test_parse_missing_column_is_named():
    cols = [c for c in CSV_HEADER if c != "x_pu"]
    text = ",".join(cols) + "\n"
    with pytest.raises(ParseError, match="x_pu"):
        parse_branch_csv(text)


def test_parse_bad_number_carries_line():
    bad = GOOD_ROW.replace("0.05", "abc")
    text = ",".join(CSV_HEADER) + "\n" + bad + "\n"
    with pytest.raises(ParseError, match="line 2") as exc:
        parse_branch_csv(text)
    assert exc.value.line == 2
    assert "x_pu" in str(exc.value)


def test_parse_wrong_field_count_carries_line():
    text = ",".join(CSV_HEADER) + "\n" + GOOD_ROW + "\n" + "only,three,cells\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_branch_csv(text)


def test_serialize_parse_round_trip():
    recs = [
        _rec(id="a", tap_ratio=1.025),
        _rec(id="b", r_pu=1e-7, x_pu=0.3333333333333333, to_kv=13.8),
        _rec(id="c", mva_rating=float("1380")),
    ]
    text = serialize_branch_csv(recs)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert parse_branch_csv(text) == recs
    # repr round-trips floats exactly and never leaks array scalar types
    assert "np." not in text


# ------------------------------------------------------------ MATPOWER text


CASE3 = """\
function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1.0\t0\t115\t1\t1.1\t0.9;
\t2\t1\t50\t10\t0\t0\t1\t1.0\t0\t115\t1\t1.1\t0.9;
\t3\t1\t30\t5\t0\t0\t1\t1.0\t0\t13.8\t1\t1.1\t0.9;
];
mpc.branch = [
\t1\t2\t0.01\t0.05\t0.02\t80\t80\t80\t0\t0\t1\t-30\t30;
\t1\t2\t0.012\t0.06\t0.02\t80\t80\t80\t0\t0\t1\t-30\t30;
\t2\t3\t0.002\t0.04\t0\t60\t60\t60\t1.025\t0\t1\t-30\t30;
];
"""


def test_matpower_basic_fields():
    base, recs = parse_matpower_case(CASE3)
    assert base == 100.0
    assert len(recs) == 3
    line = recs[0]
    assert line.from_bus == 1 and line.to_bus == 2
    assert line.from_kv == 115.0 and line.to_kv == 115.0
    assert line.r_pu == 0.01 and line.x_pu == 0.05
    assert line.mva_rating == 80.0
    assert line.tap_ratio == 0.0
    assert line.system_mva_base == 100.0
    xfmr = recs[2]
    assert xfmr.tap_ratio == 1.025
    assert xfmr.from_kv == 115.0 and xfmr.to_kv == 13.8


def test_matpower_parallel_branch_ids():
    _, recs = parse_matpower_case(CASE3)
    assert [r.id for r in recs] == ["1-2-1", "1-2-2", "2-3-1"]


def test_matpower_comment_stripping():
    commented = CASE3.replace(
        "mpc.baseMVA = 100;", "mpc.baseMVA = 100;  % system base"
    )
    base, recs = parse_matpower_case(commented)
    assert base == 100.0
    assert len(recs) == 3


def test_matpower_unknown_bus():
    broken = CASE3.replace(
        "\t2\t3\t0.002", "\t2\t9\t0.002"
    )
    with pytest.raises(ValueError, match="9"):
        parse_matpower_case(broken)


def test_matpower_missing_base():
    with pytest.raises(ValueError, match="baseMVA"):
        parse_matpower_case("mpc.bus = [\n];\nmpc.branch = [\n];\n")


# -------------------------------------------------------------- filtering


def test_filter_reasons():
    records = [
        _rec(id="ok"),
        _rec(id="bad_r", r_pu=0.0),
        _rec(id="bad_x", x_pu=-0.1),
        _rec(id="no_rating", mva_rating=0.0),
        _rec(id="huge", mva_rating=5000.0),
        _rec(id="nan", r_pu=math.nan),
    ]
    out = filter_valid(records, rating_bounds=DEFAULT_RATING_BOUNDS)
    assert [r.id for r in out.kept] == ["ok"]
    reasons = {rec.id: reason for rec, reason in out.rejected}
    assert reasons == {
        "bad_r": RejectReason.NON_POSITIVE_R,
        "bad_x": RejectReason.NON_POSITIVE_X,
        "no_rating": RejectReason.ZERO_RATING,
        "huge": RejectReason.EXTREME_RATING,
        "nan": RejectReason.NON_FINITE,
    }
    assert len(out.kept) + len(out.rejected) == len(records)


def test_filter_reason_precedence():
    # r and x both bad: the resistance rule fires first
    out = filter_valid([_rec(r_pu=-1.0, x_pu=-1.0)])
    assert out.rejected[0][1] == RejectReason.NON_POSITIVE_R
    # NaN rating falls through the comparisons to the finiteness rule
    out = filter_valid([_rec(mva_rating=math.nan)])
    assert out.rejected[0][1] == RejectReason.NON_FINITE
    # infinite rating is caught by the bound check, not the finiteness rule
    out = filter_valid([_rec(mva_rating=math.inf)])
    assert out.rejected[0][1] == RejectReason.EXTREME_RATING


def test_filter_idempotent():
    records = [_rec(id=f"r{i}", x_pu=0.01 * (i + 1)) for i in range(5)]
    once = filter_valid(records)
    twice = filter_valid(once.kept)
    assert twice.kept == once.kept
    assert twice.rejected == []


def test_filter_rejects_bad_bounds():
    with pytest.raises(ValueError):
        filter_valid([_rec()], rating_bounds=(0.0, 3000.0))
    with pytest.raises(ValueError):
        filter_valid([_rec()], rating_bounds=(10.0, 5.0))


# ---------------------------------------------------------- classification


def test_classify_line():
    rec = _rec(tap_ratio=0.0, from_kv=115.0, to_kv=115.0)
    assert classify_branch(rec) == BranchKind.TRANSMISSION_LINE
    assert not is_transformer(BranchKind.TRANSMISSION_LINE)


def test_classify_transformer_by_tap():
    rec = _rec(tap_ratio=1.0, x_pu=0.4)
    assert classify_branch(rec) == BranchKind.TRANSFORMER


def test_classify_transformer_by_kv_mismatch():
    rec = _rec(tap_ratio=0.0, from_kv=115.0, to_kv=13.8, x_pu=0.4)
    assert classify_branch(rec) == BranchKind.TRANSFORMER


def test_classify_kv_tolerance():
    # 115 vs 116 is inside the 2 percent band of the higher side: same level
    rec = _rec(tap_ratio=0.0, from_kv=116.0, to_kv=115.0)
    assert classify_branch(rec) == BranchKind.TRANSMISSION_LINE
    rec = _rec(tap_ratio=0.0, from_kv=118.0, to_kv=115.0, x_pu=0.4)
    assert classify_branch(rec) == BranchKind.TRANSFORMER


def test_classify_autotransformer_suspect():
    rec = _rec(tap_ratio=1.0, r_pu=0.1, x_pu=0.32)  # X/R = 3.2 < 4
    kind = classify_branch(rec)
    assert kind == BranchKind.AUTOTRANSFORMER_SUSPECT
    assert is_transformer(kind)


def test_classify_threshold_boundary():
    rec = _rec(tap_ratio=1.0, r_pu=0.1, x_pu=0.4)  # X/R exactly 4
    assert classify_branch(rec) == BranchKind.TRANSFORMER


def test_lines_never_suspect():
    rec = _rec(tap_ratio=0.0, r_pu=0.1, x_pu=0.1)
    assert classify_branch(rec) == BranchKind.TRANSMISSION_LINE


def test_kind_values():
    assert BranchKind.TRANSMISSION_LINE.value == "TransmissionLine"
    assert BranchKind.TRANSFORMER.value == "Transformer"
    assert BranchKind.AUTOTRANSFORMER_SUSPECT.value == "AutotransformerSuspect"


# --------------------------------------------------------- voltage classes


def test_voltage_class_matching():
    vc = VoltageClass(nominal_kv=115.0)
    assert vc.matches(115.0)
    assert vc.matches(116.0)
    assert not vc.matches(120.0)
    with pytest.raises(ValueError):
        VoltageClass(nominal_kv=115.0, tolerance_frac=0.5)


def test_voltage_class_table_rejects_overlap():
    with pytest.raises(ValueError):
        voltage_class_table([115.0, 117.0])
    table = voltage_class_table([115.0, 138.0, 230.0])
    assert [vc.nominal_kv for vc in table] == [115.0, 138.0, 230.0]


def test_assign_transformer_uses_high_side():
    table = voltage_class_table([115.0, 138.0, 230.0])
    rec = _rec(tap_ratio=1.0, from_kv=13.8, to_kv=230.0, x_pu=0.4)
    vc = assign_voltage_class(rec, BranchKind.TRANSFORMER, table)
    assert vc is not None and vc.nominal_kv == 230.0


def test_assign_line_uses_from_side():
    table = voltage_class_table([115.0, 138.0, 230.0])
    rec = _rec(from_kv=138.0, to_kv=138.0)
    vc = assign_voltage_class(rec, BranchKind.TRANSMISSION_LINE, table)
    assert vc is not None and vc.nominal_kv == 138.0


def test_assign_unmatched_is_none():
    table = voltage_class_table([115.0, 138.0, 230.0])
    rec = _rec(from_kv=345.0, to_kv=345.0)
    assert assign_voltage_class(rec, BranchKind.TRANSMISSION_LINE, table) is None
