"""Grid case ingestion: canonical branch CSV, MATPOWER-style cases,
validity filtering, branch classification, and voltage-class assignment.

Canonical CSV header:

    id,from_bus,to_bus,from_kv,to_kv,r_pu,x_pu,mva_rating,tap_ratio,system_mva_base

Column order is irrelevant (header-driven); decimal point is `.`; UTF-8;
LF or CRLF line endings. r_pu/x_pu are on the system common MVA base.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "ParseError",
    "BranchRecord",
    "BranchKind",
    "RejectReason",
    "VoltageClass",
    "FilterOutcome",
    "CSV_HEADER",
    "DEFAULT_RATING_BOUNDS",
    "DEFAULT_CLASS_KVS",
    "parse_branch_csv",
    "serialize_branch_csv",
    "parse_matpower_case",
    "filter_valid",
    "classify_branch",
    "is_transformer",
    "voltage_class_table",
    "assign_voltage_class",
]

CSV_HEADER = (
    "id",
    "from_bus",
    "to_bus",
    "from_kv",
    "to_kv",
    "r_pu",
    "x_pu",
    "mva_rating",
    "tap_ratio",
    "system_mva_base",
)

#: MVA window outside which a reported rating is treated as a data artifact.
DEFAULT_RATING_BOUNDS = (1.0, 3000.0)

#: Voltage classes with published reference statistics.
DEFAULT_CLASS_KVS = (115.0, 138.0, 230.0)


class ParseError(ValueError):
    """Malformed case input. Carries the 1-based source line when known."""

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class BranchRecord:
    """One raw branch row; impedances on the system common MVA base.

    tap_ratio 0 marks a non-transformer branch (MATPOWER convention);
    mva_rating 0 marks an unreported rating.
    """

    id: str
    from_bus: int
    to_bus: int
    from_kv: float
    to_kv: float
    r_pu: float
    x_pu: float
    mva_rating: float
    tap_ratio: float
    system_mva_base: float


class BranchKind(Enum):
    TRANSMISSION_LINE = "TransmissionLine"
    TRANSFORMER = "Transformer"
    AUTOTRANSFORMER_SUSPECT = "AutotransformerSuspect"


def is_transformer(kind: BranchKind) -> bool:
    return kind is not BranchKind.TRANSMISSION_LINE


class RejectReason(Enum):
    NON_POSITIVE_R = "NonPositiveR"
    NON_POSITIVE_X = "NonPositiveX"
    ZERO_RATING = "ZeroRating"
    EXTREME_RATING = "ExtremeRating"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class VoltageClass:
    """Nominal kV with a relative matching tolerance."""

    nominal_kv: float
    tolerance_frac: float = 0.02

    def __post_init__(self):
        if not (math.isfinite(self.nominal_kv) and self.nominal_kv > 0):
            raise ValueError(f"nominal_kv must be > 0, got {self.nominal_kv}")
        if not 0.0 <= self.tolerance_frac <= 0.1:
            raise ValueError(f"tolerance_frac must be in [0, 0.1], got {self.tolerance_frac}")

    def matches(self, kv: float) -> bool:
        return abs(kv - self.nominal_kv) <= self.tolerance_frac * self.nominal_kv


@dataclass(frozen=True)
class FilterOutcome:
    kept: list[BranchRecord]
    rejected: list[tuple[BranchRecord, RejectReason]]


_FLOAT_FIELDS = ("from_kv", "to_kv", "r_pu", "x_pu", "mva_rating", "tap_ratio", "system_mva_base")
_INT_FIELDS = ("from_bus", "to_bus")


def parse_branch_csv(data: bytes | str) -> list[BranchRecord]:
    """Parse canonical branch CSV; raises ParseError with the failing line."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input, expected a header row") from None
    header = [h.strip() for h in header]
    index = {name: i for i, name in enumerate(header)}
    for name in CSV_HEADER:
        if name not in index:
            raise ParseError(f"missing required column {name!r}")

    records = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(row)}", line=line
            )
        fields = {"id": row[index["id"]].strip()}
        for name in _INT_FIELDS:
            raw = row[index[name]].strip()
            try:
                fields[name] = int(raw)
            except ValueError:
                raise ParseError(f"column {name!r}: not an integer: {raw!r}", line=line) from None
        for name in _FLOAT_FIELDS:
            raw = row[index[name]].strip()
            try:
                fields[name] = float(raw)
            except ValueError:
                raise ParseError(f"column {name!r}: not a number: {raw!r}", line=line) from None
        records.append(BranchRecord(**fields))
    return records


def serialize_branch_csv(records) -> str:
    """Inverse of parse_branch_csv; floats use shortest round-trip repr."""
    lines = [",".join(CSV_HEADER)]
    for r in records:
        cells = [r.id, str(int(r.from_bus)), str(int(r.to_bus))] + [
            repr(float(getattr(r, name))) for name in _FLOAT_FIELDS
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _strip_matlab_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _matpower_matrix(text: str, name: str) -> list[list[float]]:
    match = re.search(rf"\.{name}\s*=\s*\[(.*?)\];", text, re.DOTALL)
    if match is None:
        raise ParseError(f"missing matrix {name!r}")
    rows = []
    for chunk in re.split(r"[;\n]", match.group(1)):
        tokens = chunk.replace(",", " ").split()
        if not tokens:
            continue
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as exc:
            raise ParseError(f"matrix {name!r}: unparsable row {chunk.strip()!r}") from exc
    return rows


def parse_matpower_case(text: str) -> tuple[float, list[BranchRecord]]:
    """Parse a MATPOWER-style case (baseMVA, bus and branch matrices).

    Bus matrix: bus id in column 1, baseKV in column 10. Branch matrix:
    fbus, tbus, r, x, b, rateA, rateB, rateC, ratio, ... Record ids are
    synthesized as "fbus-tbus-k" with k counting parallel branches.
    """
    text = _strip_matlab_comments(text)
    base_match = re.search(r"\.baseMVA\s*=\s*([0-9eE.+-]+)\s*;", text)
    if base_match is None:
        raise ParseError("missing baseMVA")
    base_mva = float(base_match.group(1))

    kv_by_bus = {}
    for i, row in enumerate(_matpower_matrix(text, "bus"), start=1):
        if len(row) < 10:
            raise ParseError(f"bus row {i}: expected at least 10 columns, got {len(row)}")
        kv_by_bus[int(row[0])] = row[9]

    records = []
    parallel_count: dict[tuple[int, int], int] = {}
    for i, row in enumerate(_matpower_matrix(text, "branch"), start=1):
        if len(row) < 9:
            raise ParseError(f"branch row {i}: expected at least 9 columns, got {len(row)}")
        fbus, tbus = int(row[0]), int(row[1])
        for bus in (fbus, tbus):
            if bus not in kv_by_bus:
                raise ParseError(f"branch row {i}: unknown bus {bus}")
        k = parallel_count.get((fbus, tbus), 0) + 1
        parallel_count[(fbus, tbus)] = k
        records.append(
            BranchRecord(
                id=f"{fbus}-{tbus}-{k}",
                from_bus=fbus,
                to_bus=tbus,
                from_kv=kv_by_bus[fbus],
                to_kv=kv_by_bus[tbus],
                r_pu=row[2],
                x_pu=row[3],
                mva_rating=row[5],
                tap_ratio=row[8],
                system_mva_base=base_mva,
            )
        )
    return base_mva, records


def _reject_reason(r: BranchRecord, lo: float, hi: float) -> RejectReason | None:
    # Rule order is fixed; a record failing several rules reports the first.
    if r.r_pu <= 0:
        return RejectReason.NON_POSITIVE_R
    if r.x_pu <= 0:
        return RejectReason.NON_POSITIVE_X
    if r.mva_rating == 0:
        return RejectReason.ZERO_RATING
    if r.mva_rating < lo or r.mva_rating > hi:
        return RejectReason.EXTREME_RATING
    numeric = (
        r.from_kv, r.to_kv, r.r_pu, r.x_pu, r.mva_rating, r.tap_ratio, r.system_mva_base,
    )
    if not all(math.isfinite(v) for v in numeric):
        return RejectReason.NON_FINITE
    return None


def filter_valid(records, rating_bounds: tuple[float, float] = DEFAULT_RATING_BOUNDS) -> FilterOutcome:
    """Drop abnormal branch rows: R <= 0, X <= 0, zero or extreme MVA
    ratings, and non-finite fields. Rejection is data, not an error."""
    lo, hi = rating_bounds
    if not lo > 0:
        raise ValueError(f"rating_bounds minimum must be > 0, got {lo}")
    if not hi > lo:
        raise ValueError(f"rating_bounds must satisfy min < max, got {rating_bounds}")
    kept = []
    rejected = []
    for r in records:
        reason = _reject_reason(r, lo, hi)
        if reason is None:
            kept.append(r)
        else:
            rejected.append((r, reason))
    return FilterOutcome(kept=kept, rejected=rejected)


def classify_branch(
    record: BranchRecord,
    autotransformer_xr_threshold: float = 4.0,
    *,
    kv_tolerance_frac: float = 0.02,
) -> BranchKind:
    """Transformer when the tap is set or terminal voltages differ beyond
    tolerance; a transformer with X/R below the threshold is flagged as a
    likely autotransformer. Requires a filtered record (r_pu > 0)."""
    hi_kv = max(record.from_kv, record.to_kv)
    kv_differ = abs(record.from_kv - record.to_kv) > kv_tolerance_frac * hi_kv
    if record.tap_ratio == 0 and not kv_differ:
        return BranchKind.TRANSMISSION_LINE
    if record.x_pu / record.r_pu < autotransformer_xr_threshold:
        return BranchKind.AUTOTRANSFORMER_SUSPECT
    return BranchKind.TRANSFORMER


def voltage_class_table(nominal_kvs, tolerance_frac: float = 0.02) -> list[VoltageClass]:
    """Build a class table, rejecting overlapping tolerance intervals."""
    classes = sorted(
        (VoltageClass(float(kv), tolerance_frac) for kv in nominal_kvs),
        key=lambda c: c.nominal_kv,
    )
    for a, b in zip(classes, classes[1:]):
        if a.nominal_kv * (1 + a.tolerance_frac) >= b.nominal_kv * (1 - b.tolerance_frac):
            raise ValueError(
                f"voltage classes {a.nominal_kv} and {b.nominal_kv} overlap "
                f"under tolerance {tolerance_frac}"
            )
    return classes


def assign_voltage_class(
    record: BranchRecord, kind: BranchKind, classes
) -> VoltageClass | None:
    """Match transformers by high-voltage terminal, lines by from-terminal.

    Returns None when no class matches; such records are excluded from
    per-class statistics. Assumes a non-overlapping class table.
    """
    kv = max(record.from_kv, record.to_kv) if is_transformer(kind) else record.from_kv
    for cls in classes:
        if cls.matches(kv):
            return cls
    return None
