"""Case analysis pipeline: filter and classify branch records, collect
per-(parameter, voltage class) samples, and package the statistics that
validation and reporting consume.

Autotransformer suspects are transformers for statistical purposes; the
tag exists so reports can show how many suspects a class contains, not
to exclude them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import (
    DEFAULT_CLASS_KVS,
    DEFAULT_RATING_BOUNDS,
    BranchKind,
    BranchRecord,
    RejectReason,
    assign_voltage_class,
    classify_branch,
    filter_valid,
    is_transformer,
    voltage_class_table,
)
from .per_unit import to_own_base, xr_ratio
from .profiles import ObservedClassStats, ParameterKind, lookup
from .stats import Binning, FreedmanDiaconis, band_fraction, histogram, pearson, spearman, summarize

__all__ = [
    "CollectedSamples",
    "DecorrelationStats",
    "collect_samples",
    "observed_stats",
    "decorrelation_stats",
    "spearman_own_by_class",
]


@dataclass(frozen=True)
class CollectedSamples:
    """Raw per-class value arrays plus bookkeeping counts.

    values maps (ParameterKind, class_kv) to a 1-D array in record order.
    transformer_triples maps class_kv to (x_own, x_common, mva) arrays for
    correlation analyses. suspect_counts tallies autotransformer suspects
    included in the transformer samples.
    """

    values: dict[tuple[ParameterKind, float], np.ndarray]
    transformer_triples: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]]
    kept: int
    rejected: list[tuple[BranchRecord, RejectReason]]
    unclassified: int
    suspect_counts: dict[float, int] = field(default_factory=dict)


def collect_samples(
    records,
    class_kvs=DEFAULT_CLASS_KVS,
    *,
    rating_bounds=DEFAULT_RATING_BOUNDS,
    autotransformer_xr_threshold: float = 4.0,
) -> CollectedSamples:
    """Filter, classify, and bucket branch records into parameter samples.

    Transformers contribute own-base reactance (rebased by their rating),
    rating, and X/R; lines contribute common-base reactance, capacity, and
    X/R. Records matching no voltage class are counted, not errors.
    """
    classes = voltage_class_table(class_kvs)
    outcome = filter_valid(records, rating_bounds)

    buckets: dict[tuple[ParameterKind, float], list[float]] = {}
    triples: dict[float, tuple[list[float], list[float], list[float]]] = {}
    suspects: dict[float, int] = {}
    unclassified = 0

    def push(kind: ParameterKind, kv: float, value: float) -> None:
        buckets.setdefault((kind, kv), []).append(value)

    for record in outcome.kept:
        kind = classify_branch(record, autotransformer_xr_threshold)
        cls = assign_voltage_class(record, kind, classes)
        if cls is None:
            unclassified += 1
            continue
        kv = cls.nominal_kv
        xr = xr_ratio(record.r_pu, record.x_pu)
        if is_transformer(kind):
            x_own = to_own_base(record.x_pu, record.system_mva_base, record.mva_rating)
            push(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, kv, x_own)
            push(ParameterKind.TRANSFORMER_MVA_RATING, kv, record.mva_rating)
            push(ParameterKind.TRANSFORMER_XR, kv, xr)
            t = triples.setdefault(kv, ([], [], []))
            t[0].append(x_own)
            t[1].append(record.x_pu)
            t[2].append(record.mva_rating)
            if kind is BranchKind.AUTOTRANSFORMER_SUSPECT:
                suspects[kv] = suspects.get(kv, 0) + 1
        else:
            push(ParameterKind.LINE_REACTANCE_COMMON_BASE, kv, record.x_pu)
            push(ParameterKind.LINE_CAPACITY, kv, record.mva_rating)
            push(ParameterKind.LINE_XR, kv, xr)

    return CollectedSamples(
        values={k: np.asarray(v, dtype=float) for k, v in buckets.items()},
        transformer_triples={
            kv: tuple(np.asarray(col, dtype=float) for col in cols)
            for kv, cols in triples.items()
        },
        kept=len(outcome.kept),
        rejected=outcome.rejected,
        unclassified=unclassified,
        suspect_counts=suspects,
    )


def observed_stats(
    collected: CollectedSamples,
    profile=None,
    *,
    binning: Binning = FreedmanDiaconis(),
) -> dict[tuple[ParameterKind, float], ObservedClassStats]:
    """Summarize every collected sample. Band fractions are computed for
    entries whose profile declares a band; degenerate (constant) samples
    get summary statistics but no histogram."""
    out = {}
    for (kind, kv), arr in collected.values.items():
        try:
            hist = histogram(arr, binning)
        except ValueError:
            hist = None
        frac = None
        if profile is not None:
            entry = lookup(profile, kind, kv)
            if entry is not None and entry.band is not None:
                frac = band_fraction(arr, entry.band.lo, entry.band.hi)
        out[(kind, kv)] = ObservedClassStats(
            summary=summarize(arr), hist=hist, band_fraction=frac, values=arr
        )
    return out


@dataclass(frozen=True)
class DecorrelationStats:
    """Correlation of transformer reactance with rating, on both bases.

    Own-base reactance should be nearly uncorrelated with rating; the
    common-base values anticorrelate because the base conversion divides
    by the rating.
    """

    class_kv: float
    n: int
    pearson_own: float
    spearman_own: float
    pearson_common: float
    spearman_common: float


def decorrelation_stats(collected: CollectedSamples) -> dict[float, DecorrelationStats]:
    """Per-class reactance-vs-rating correlations; classes whose samples
    are too small or constant (correlation undefined) are omitted."""
    out = {}
    for kv, (x_own, x_common, mva) in collected.transformer_triples.items():
        if x_own.size < 2:
            continue
        try:
            out[kv] = DecorrelationStats(
                class_kv=kv,
                n=int(x_own.size),
                pearson_own=pearson(x_own, mva),
                spearman_own=spearman(x_own, mva),
                pearson_common=pearson(x_common, mva),
                spearman_common=spearman(x_common, mva),
            )
        except ValueError:
            continue
    return out


def spearman_own_by_class(decorr: dict[float, DecorrelationStats]) -> dict[float, float]:
    """The map validate() expects for its decorrelation check."""
    return {kv: d.spearman_own for kv, d in decorr.items()}
