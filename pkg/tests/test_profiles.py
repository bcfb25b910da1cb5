"""Reference profile schema, JSON round trips, and validation findings."""

import json

import numpy as np
import pytest

from gridparams.distributions import Exponential, Gev, Normal, sample
from gridparams.profiles import (
    DEFAULT_THRESHOLDS,
    EXPECTED_FAMILY,
    BandRef,
    ObservedClassStats,
    ParameterKind,
    ReferenceEntry,
    SummaryRef,
    ValidationThresholds,
    builtin_profile,
    lookup,
    parse_profile_json,
    report_to_dict,
    serialize_profile_json,
    serialize_report,
    thresholds_from_dict,
    validate,
)
from gridparams.stats import FreedmanDiaconis, SummaryStats, histogram, summarize


def _summary(**kw):
    base = dict(median=0.13, mean=0.14, min=0.001, max=1.0)
    base.update(kw)
    return SummaryRef(**base)


def _stats(values, band=None, with_hist=True):
    arr = np.asarray(values, dtype=float)
    hist = None
    if with_hist:
        try:
            hist = histogram(arr, FreedmanDiaconis())
        except ValueError:
            hist = None
    return ObservedClassStats(
        summary=summarize(arr),
        hist=hist,
        band_fraction=band,
        values=arr,
    )


# ------------------------------------------------------------ entry schema


def test_entry_needs_some_content():
    with pytest.raises(ValueError):
        ReferenceEntry(kind=ParameterKind.TRANSFORMER_MVA_RATING, class_kv=115.0)


def test_entry_family_must_match_kind():
    with pytest.raises(ValueError):
        ReferenceEntry(
            kind=ParameterKind.TRANSFORMER_MVA_RATING,
            class_kv=115.0,
            family="normal",
        )
    e = ReferenceEntry(
        kind=ParameterKind.LINE_CAPACITY, class_kv=115.0, family="normal"
    )
    assert e.family == EXPECTED_FAMILY[ParameterKind.LINE_CAPACITY]


def test_entry_fitted_requires_consistent_family():
    with pytest.raises(ValueError):
        ReferenceEntry(
            kind=ParameterKind.TRANSFORMER_MVA_RATING,
            class_kv=115.0,
            family="gev",
            fitted=Normal(1.0, 1.0),
        )


def test_entry_reference_kl_requires_fitted():
    with pytest.raises(ValueError):
        ReferenceEntry(
            kind=ParameterKind.TRANSFORMER_MVA_RATING,
            class_kv=115.0,
            family="gev",
            reference_d_kl=0.1,
        )


def test_summary_ref_ordering():
    with pytest.raises(ValueError):
        SummaryRef(min=2.0, max=1.0)
    with pytest.raises(ValueError):
        SummaryRef(q10=5.0, q90=1.0)
    with pytest.raises(ValueError):
        SummaryRef()


def test_band_ref_bounds():
    with pytest.raises(ValueError):
        BandRef(lo=0.2, hi=0.1, fraction=0.5)
    with pytest.raises(ValueError):
        BandRef(lo=0.0, hi=1.0, fraction=1.5)
    b = BandRef(lo=0.05, hi=0.2, fraction=0.8188)
    assert b.fraction == 0.8188


def test_duplicate_entries_rejected():
    e = ReferenceEntry(
        kind=ParameterKind.LINE_CAPACITY, class_kv=115.0, family="normal"
    )
    with pytest.raises(ValueError, match="duplicate"):
        serialize_profile_json([e, e])
    one = json.loads(serialize_profile_json([e]))
    blob = json.dumps(one + one)
    with pytest.raises(ValueError, match="duplicate"):
        parse_profile_json(blob)


def test_lookup():
    profile = builtin_profile()
    e = lookup(profile, ParameterKind.TRANSFORMER_MVA_RATING, 230.0)
    assert e is not None and e.fitted is not None
    assert lookup(profile, ParameterKind.TRANSFORMER_MVA_RATING, 345.0) is None


# -------------------------------------------------------------- thresholds


def test_threshold_validation():
    with pytest.raises(ValueError):
        ValidationThresholds(median_rel=-0.1)
    with pytest.raises(ValueError):
        ValidationThresholds(range_factor=0.5)
    t = ValidationThresholds()
    assert t == DEFAULT_THRESHOLDS


def test_thresholds_from_dict():
    t = thresholds_from_dict({"median_rel": 0.5, "kl_max_nats": 1.0})
    assert t.median_rel == 0.5
    assert t.kl_max_nats == 1.0
    assert t.band_abs == DEFAULT_THRESHOLDS.band_abs
    with pytest.raises(ValueError, match="nope"):
        thresholds_from_dict({"nope": 1.0})


# ------------------------------------------------------ profile JSON I/O


def test_builtin_profile_round_trip():
    profile = builtin_profile()
    assert len(profile) == 18
    blob = serialize_profile_json(profile)
    assert parse_profile_json(blob) == profile


def test_builtin_profile_is_copy():
    a = builtin_profile()
    a.pop()
    assert len(builtin_profile()) == 18


def test_parse_profile_requires_array():
    with pytest.raises(ValueError):
        parse_profile_json(json.dumps({"kind": "LineCapacity"}))


def test_builtin_expected_families():
    profile = builtin_profile()
    for e in profile:
        if e.family is not None:
            assert e.family == EXPECTED_FAMILY[e.kind]


# ------------------------------------------------------------- validation


def _xfmr_x_entry():
    return lookup(builtin_profile(), ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0)


def _finding(report, check, kind=None):
    found = [
        f
        for f in report.findings
        if f.check == check and (kind is None or f.kind == kind)
    ]
    assert found, f"no {check} finding in report"
    return found[0]


def test_median_check_passes_within_band():
    entry = _xfmr_x_entry()
    ref_median = entry.summary.median
    values = np.full(50, ref_median * 1.1)  # 10 percent off, limit is 25
    values[0] = ref_median * 0.5  # avoid a degenerate histogram
    observed = {
        (ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values, with_hist=False)
    }
    report = validate(observed, [entry])
    f = _finding(report, "MedianCheck")
    assert f.status == "pass"
    assert f.kind == ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE


def test_median_check_fails_far_out():
    entry = _xfmr_x_entry()
    values = np.linspace(1.0, 2.0, 50)  # median ~1.5, reference is ~0.129
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values)}
    report = validate(observed, [entry])
    f = _finding(report, "MedianCheck")
    assert f.status == "fail"
    assert not report.overall_pass


def test_band_check():
    entry = _xfmr_x_entry()
    rng = np.random.default_rng(0)
    inside = rng.uniform(0.06, 0.19, 818)
    outside = rng.uniform(0.3, 0.9, 182)
    values = np.concatenate([inside, outside])
    frac = float(np.mean((values >= entry.band.lo) & (values <= entry.band.hi)))
    observed = {
        (ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values, band=frac)
    }
    report = validate(observed, [entry])
    f = _finding(report, "BandCheck")
    assert f.status == "pass"
    # and a clearly wrong mass fails
    observed = {
        (ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values, band=0.60)
    }
    report = validate(observed, [entry])
    assert _finding(report, "BandCheck").status == "fail"


def test_missing_class_is_skipped_not_failed():
    entry = _xfmr_x_entry()
    report = validate({}, [entry])
    assert report.overall_pass
    assert {f.status for f in report.findings} == {"skipped"}
    f = _finding(report, "CoverageCheck")
    assert f.threshold == "none"


def test_kl_check_only_with_fitted_params():
    profile = builtin_profile()
    entry = lookup(profile, ParameterKind.TRANSFORMER_MVA_RATING, 115.0)
    xs = sample(entry.fitted, seed=13, n=4000)
    xs = xs[(xs >= 1.0) & (xs <= 3000.0)]
    observed = {(ParameterKind.TRANSFORMER_MVA_RATING, 115.0): _stats(xs)}
    report = validate(observed, [entry])
    f = _finding(report, "KlCheck")
    assert f.status == "pass"
    # family-only entries get no KlCheck
    cap = lookup(profile, ParameterKind.LINE_CAPACITY, 115.0)
    xs = sample(Normal(180.0, 60.0), seed=13, n=1000)
    observed = {(ParameterKind.LINE_CAPACITY, 115.0): _stats(xs)}
    report = validate(observed, [cap])
    assert not any(f.check == "KlCheck" for f in report.findings)


def test_range_check_center_scaling():
    entry = _xfmr_x_entry()
    lo, hi = entry.summary.min, entry.summary.max
    center = (lo + hi) / 2.0
    half = (hi - lo) / 2.0 * DEFAULT_THRESHOLDS.range_factor
    ok = np.linspace(max(center - half, 1e-6) + 1e-9, center + half - 1e-9, 60)
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(ok)}
    report = validate(observed, [entry])
    assert _finding(report, "RangeCheck").status == "pass"
    bad = np.linspace(0.01, center + half + 5.0, 60)
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(bad)}
    report = validate(observed, [entry])
    f = _finding(report, "RangeCheck")
    assert f.status == "fail"
    assert isinstance(f.observed, tuple) and len(f.observed) == 2


def test_decorrelation_check():
    entry = _xfmr_x_entry()
    values = np.linspace(0.05, 0.3, 40)
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values)}
    report = validate(
        observed, [entry], transformer_decorrelation={115.0: 0.05}
    )
    assert _finding(report, "DecorrelationCheck").status == "pass"
    report = validate(
        observed, [entry], transformer_decorrelation={115.0: -0.40}
    )
    assert _finding(report, "DecorrelationCheck").status == "fail"
    report = validate(observed, [entry])
    assert _finding(report, "DecorrelationCheck").status == "skipped"


def test_family_check_passes_for_exponential_line_data():
    profile = builtin_profile()
    entry = lookup(profile, ParameterKind.LINE_REACTANCE_COMMON_BASE, 115.0)
    xs = sample(Exponential(0.008686), seed=21, n=3000)
    observed = {(ParameterKind.LINE_REACTANCE_COMMON_BASE, 115.0): _stats(xs)}
    report = validate(observed, [entry])
    f = _finding(report, "FamilyCheck")
    assert f.status == "pass"


def test_family_check_needs_values():
    profile = builtin_profile()
    entry = lookup(profile, ParameterKind.LINE_REACTANCE_COMMON_BASE, 115.0)
    xs = sample(Exponential(0.008686), seed=21, n=3000)
    stats = _stats(xs)
    stats = ObservedClassStats(
        summary=stats.summary,
        hist=stats.hist,
        band_fraction=None,
        values=None,
    )
    observed = {(ParameterKind.LINE_REACTANCE_COMMON_BASE, 115.0): stats}
    report = validate(observed, [entry])
    assert _finding(report, "FamilyCheck").status == "skipped"


def test_overall_pass_semantics():
    entry = _xfmr_x_entry()
    values = np.linspace(1.0, 2.0, 50)
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values)}
    report = validate(observed, [entry])
    assert not report.overall_pass
    assert any(f.status == "fail" for f in report.findings)


# ---------------------------------------------------------------- reports


def test_report_serialization_is_deterministic():
    entry = _xfmr_x_entry()
    values = np.linspace(0.05, 0.3, 40)
    observed = {(ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, 115.0): _stats(values)}
    report = validate(observed, [entry])
    a = serialize_report(report)
    b = serialize_report(validate(observed, [entry]))
    assert a == b
    payload = json.loads(a)
    assert payload["overall_pass"] == report.overall_pass
    assert isinstance(payload["findings"], list)


def test_report_to_dict_shape():
    entry = _xfmr_x_entry()
    report = validate({}, [entry])
    d = report_to_dict(report)
    assert set(d) >= {"findings", "overall_pass", "thresholds"}
    for f in d["findings"]:
        assert f["status"] in {"pass", "fail", "skipped"}
