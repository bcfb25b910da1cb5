"""Synthetic branch parameter generation from reference profiles.

Transformers: MVA rating, own-base reactance, and X/R are drawn from
three mutually independent streams (SeedSequence(seed).spawn(3), in that
fixed order), each truncated to its profile range by rejection. The
independence of the own-base draws is the modeling choice that makes
common-base reactance anticorrelate with rating after conversion, while
own-base reactance stays uncorrelated.

Lines: common-base reactance (exponential), capacity and X/R (normal,
truncated positive) from spawn(3) streams in the order
[reactance, capacity, xr].

Reactance calibration: published tables give the reactance median and
the probability mass on a band, but no t location-scale parameters, so
the scale is solved numerically from those two targets at a chosen nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistSpec, Exponential, Normal, Tls, cdf, sample_stream
from .ingest import BranchKind, BranchRecord, is_transformer
from .profiles import ParameterKind, ReferenceEntry, lookup

__all__ = [
    "DEFAULT_LINE_REACTANCE_MEAN",
    "DEFAULT_TLS_NU",
    "MAX_REJECTION_ROUNDS",
    "SyntheticBranchParams",
    "CalibratedTls",
    "calibrate_reactance_tls",
    "generate_transformers",
    "generate_lines",
    "params_csv",
    "params_to_branch_records",
]

#: Exponential mean solving P(X <= 0.02 p.u.) = 0.9: reads "mostly below
#: 0.02 p.u." as a 90% quantile. An assumption; override with fitted
#: values when line data is available.
DEFAULT_LINE_REACTANCE_MEAN = 0.02 / math.log(10.0)

#: Shape for calibrated reactance distributions: moderately heavy tails.
DEFAULT_TLS_NU = 3.0

MAX_REJECTION_ROUNDS = 1000

_CALIBRATION_TOL = 1e-6


@dataclass(frozen=True)
class SyntheticBranchParams:
    """One generated branch. Transformers carry both bases (own-base x/r
    plus the common-base conversion); lines carry the common base only.
    xr equals x/r bit-exactly on the primary base (own for transformers,
    common for lines)."""

    kind: BranchKind
    class_kv: float
    mva_rating: float
    x_pu_common: float
    r_pu_common: float
    xr: float
    x_pu_own: float | None = None
    r_pu_own: float | None = None

    def __post_init__(self):
        required = {
            "class_kv": self.class_kv,
            "mva_rating": self.mva_rating,
            "x_pu_common": self.x_pu_common,
            "r_pu_common": self.r_pu_common,
            "xr": self.xr,
        }
        for name, v in required.items():
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        own = (self.x_pu_own, self.r_pu_own)
        if is_transformer(self.kind):
            if any(v is None for v in own):
                raise ValueError("transformer parameters need own-base x and r")
            for name, v in zip(("x_pu_own", "r_pu_own"), own):
                if not (math.isfinite(v) and v > 0):
                    raise ValueError(f"{name} must be finite and > 0, got {v}")
            x, r = self.x_pu_own, self.r_pu_own
        else:
            if any(v is not None for v in own):
                raise ValueError("line parameters are common-base only")
            x, r = self.x_pu_common, self.r_pu_common
        if abs(x / r - self.xr) > 1e-9 * self.xr:
            raise ValueError(f"xr {self.xr} inconsistent with x/r = {x / r}")


@dataclass(frozen=True)
class CalibratedTls:
    """Calibrated reactance distribution; residual is the absolute gap
    between achieved and targeted band mass."""

    dist: Tls
    residual: float

    def __post_init__(self):
        if not (math.isfinite(self.residual) and self.residual >= 0):
            raise ValueError(f"residual must be >= 0, got {self.residual}")


def _band_mass(d: Tls, lo: float, hi: float, truncate_to) -> float:
    mass = float(cdf(d, hi) - cdf(d, lo))
    if truncate_to is None:
        return mass
    t_lo, t_hi = truncate_to
    denom = float(cdf(d, t_hi) - cdf(d, t_lo))
    return mass / denom


def calibrate_reactance_tls(
    target: ReferenceEntry,
    nu: float = DEFAULT_TLS_NU,
    *,
    truncate_to: tuple[float, float] | None = None,
    tol: float = _CALIBRATION_TOL,
) -> CalibratedTls:
    """Solve for the t location-scale distribution with location at the
    target's median whose mass on the target band equals the band
    fraction within tol.

    With truncate_to=(lo, hi), the calibrated quantity is the band mass
    conditional on landing inside the truncation interval, matching what
    a truncated sampler actually produces.
    """
    if not nu > 1:
        raise ValueError(f"nu must be > 1, got {nu}")
    if target.summary is None or target.summary.median is None:
        raise ValueError("calibration target needs a summary median")
    if target.band is None:
        raise ValueError("calibration target needs a band")
    mu = target.summary.median
    band = target.band
    if not band.lo < mu < band.hi:
        raise ValueError(
            f"band [{band.lo}, {band.hi}] must contain the median {mu} "
            "for the band mass to be solvable in the scale"
        )
    if truncate_to is not None:
        t_lo, t_hi = truncate_to
        if not t_lo < mu < t_hi:
            raise ValueError(f"truncation interval ({t_lo}, {t_hi}] must contain the median {mu}")
    if not 0.0 < band.fraction < 1.0:
        raise ValueError(
            f"band fraction {band.fraction} is unachievable: the achievable "
            "supremum is 1 (open) and the infimum is above 0"
        )

    def mass(sigma: float) -> float:
        return _band_mass(Tls(mu=mu, sigma=sigma, nu=nu), band.lo, band.hi, truncate_to)

    # Mass shrinks as the scale grows (band contains the location), so
    # bracket by scaling sigma in both directions, then bisect.
    sigma_lo = sigma_hi = 0.5 * (band.hi - band.lo)
    for _ in range(200):
        if mass(sigma_lo) >= band.fraction:
            break
        sigma_lo /= 2.0
    else:
        raise ValueError(
            f"band fraction {band.fraction} exceeds the achievable supremum "
            f"{mass(sigma_lo):.6f} for nu={nu}"
        )
    # Conditional mass levels off at a positive limit under truncation, so
    # watch for a plateau (or precision loss) instead of doubling blindly.
    m_hi = mass(sigma_hi)
    prev = math.inf
    for _ in range(200):
        if m_hi <= band.fraction:
            break
        if not 0.0 <= m_hi <= 1.0 or abs(m_hi - prev) <= 1e-12:
            raise ValueError(
                f"band fraction {band.fraction} is below the achievable infimum "
                f"{min(prev, 1.0):.6f} for nu={nu} under truncation {truncate_to}"
            )
        prev = m_hi
        sigma_hi *= 2.0
        m_hi = mass(sigma_hi)
    else:
        raise ValueError(
            f"band fraction {band.fraction} is below the achievable infimum "
            f"{m_hi:.6f} for nu={nu} under truncation {truncate_to}"
        )

    for _ in range(500):
        sigma = 0.5 * (sigma_lo + sigma_hi)
        m = mass(sigma)
        if abs(m - band.fraction) <= tol:
            return CalibratedTls(dist=Tls(mu=mu, sigma=sigma, nu=nu), residual=abs(m - band.fraction))
        if m > band.fraction:
            sigma_lo = sigma
        else:
            sigma_hi = sigma
    raise ArithmeticError(
        f"calibration did not reach tolerance {tol}; last residual {abs(m - band.fraction)}"
    )


def _require_entry(profile, kind: ParameterKind, class_kv: float) -> ReferenceEntry:
    entry = lookup(profile, kind, class_kv)
    if entry is None:
        raise ValueError(f"profile lacks {kind.value} for class {class_kv:g} kV")
    return entry


def _require_fitted(entry: ReferenceEntry) -> DistSpec:
    if entry.fitted is None:
        raise ValueError(
            f"{entry.kind.value} at {entry.class_kv:g} kV has no fitted parameters; "
            "supply a profile with fitted values for this entry"
        )
    return entry.fitted


def _require_max(entry: ReferenceEntry) -> float:
    if entry.summary is None or entry.summary.max is None:
        raise ValueError(f"{entry.kind.value} at {entry.class_kv:g} kV needs a summary max")
    return entry.summary.max


def _sample_truncated(
    d: DistSpec,
    rng: np.random.Generator,
    n: int,
    lo: float,
    hi: float,
    *,
    closed_lo: bool,
    entry_desc: str,
) -> np.ndarray:
    out = sample_stream(d, rng, n)
    for _ in range(MAX_REJECTION_ROUNDS):
        below = out < lo if closed_lo else out <= lo
        bad = below | (out > hi)
        k = int(np.count_nonzero(bad))
        if k == 0:
            return out
        out[bad] = sample_stream(d, rng, k)
    raise RuntimeError(
        f"rejection sampling for {entry_desc} exceeded {MAX_REJECTION_ROUNDS} rounds; "
        "the profile distribution and its truncation interval are inconsistent"
    )


def _spawn_streams(seed: int, k: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(k)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def generate_transformers(
    class_kv: float,
    n: int,
    seed: int,
    profile,
    system_mva_base: float,
    *,
    nu: float = DEFAULT_TLS_NU,
) -> list[SyntheticBranchParams]:
    """Draw n transformer parameter sets for one voltage class.

    Streams (fixed order): rating, own-base reactance, X/R. Rating is
    truncated to the profile's full range; reactance and X/R to (0, max].
    Resistance follows as reactance / X/R; common-base values follow from
    the rating and the system base.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not system_mva_base > 0:
        raise ValueError(f"system_mva_base must be > 0, got {system_mva_base}")
    x_entry = _require_entry(profile, ParameterKind.TRANSFORMER_REACTANCE_OWN_BASE, class_kv)
    mva_entry = _require_entry(profile, ParameterKind.TRANSFORMER_MVA_RATING, class_kv)
    xr_entry = _require_entry(profile, ParameterKind.TRANSFORMER_XR, class_kv)

    mva_dist = _require_fitted(mva_entry)
    xr_dist = _require_fitted(xr_entry)
    if mva_entry.summary is None or mva_entry.summary.min is None:
        raise ValueError(
            f"{mva_entry.kind.value} at {class_kv:g} kV needs a summary range for truncation"
        )
    mva_lo, mva_hi = mva_entry.summary.min, _require_max(mva_entry)
    x_max = _require_max(x_entry)
    xr_max = _require_max(xr_entry)

    calibrated = calibrate_reactance_tls(x_entry, nu, truncate_to=(0.0, x_max))

    rng_mva, rng_x, rng_xr = _spawn_streams(seed, 3)
    mva = _sample_truncated(
        mva_dist, rng_mva, n, mva_lo, mva_hi, closed_lo=True,
        entry_desc=f"{mva_entry.kind.value} at {class_kv:g} kV",
    )
    x_own = _sample_truncated(
        calibrated.dist, rng_x, n, 0.0, x_max, closed_lo=False,
        entry_desc=f"{x_entry.kind.value} at {class_kv:g} kV",
    )
    xr_draw = _sample_truncated(
        xr_dist, rng_xr, n, 0.0, xr_max, closed_lo=False,
        entry_desc=f"{xr_entry.kind.value} at {class_kv:g} kV",
    )

    out = []
    for i in range(n):
        r_own = x_own[i] / xr_draw[i]
        out.append(
            SyntheticBranchParams(
                kind=BranchKind.TRANSFORMER,
                class_kv=class_kv,
                mva_rating=float(mva[i]),
                x_pu_own=float(x_own[i]),
                r_pu_own=float(r_own),
                x_pu_common=float(x_own[i] * system_mva_base / mva[i]),
                r_pu_common=float(r_own * system_mva_base / mva[i]),
                xr=float(x_own[i] / r_own),
            )
        )
    return out


def generate_lines(class_kv: float, n: int, seed: int, profile) -> list[SyntheticBranchParams]:
    """Draw n line parameter sets: exponential common-base reactance,
    normal capacity and X/R truncated positive.

    Streams (fixed order): reactance, capacity, X/R. A reactance entry
    without parameters falls back to DEFAULT_LINE_REACTANCE_MEAN; capacity
    and X/R have no defensible defaults and must carry fitted parameters.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x_entry = _require_entry(profile, ParameterKind.LINE_REACTANCE_COMMON_BASE, class_kv)
    cap_entry = _require_entry(profile, ParameterKind.LINE_CAPACITY, class_kv)
    xr_entry = _require_entry(profile, ParameterKind.LINE_XR, class_kv)

    x_dist = x_entry.fitted if x_entry.fitted is not None else Exponential(DEFAULT_LINE_REACTANCE_MEAN)
    cap_dist = _require_fitted(cap_entry)
    xr_dist = _require_fitted(xr_entry)

    rng_x, rng_cap, rng_xr = _spawn_streams(seed, 3)
    # Inverse-transform exponential draws are already strictly positive.
    x = sample_stream(x_dist, rng_x, n)
    cap = _sample_truncated(
        cap_dist, rng_cap, n, 0.0, math.inf, closed_lo=False,
        entry_desc=f"{cap_entry.kind.value} at {class_kv:g} kV",
    )
    xr_draw = _sample_truncated(
        xr_dist, rng_xr, n, 0.0, math.inf, closed_lo=False,
        entry_desc=f"{xr_entry.kind.value} at {class_kv:g} kV",
    )

    out = []
    for i in range(n):
        r = x[i] / xr_draw[i]
        out.append(
            SyntheticBranchParams(
                kind=BranchKind.TRANSMISSION_LINE,
                class_kv=class_kv,
                mva_rating=float(cap[i]),
                x_pu_common=float(x[i]),
                r_pu_common=float(r),
                xr=float(x[i] / r),
            )
        )
    return out


PARAMS_CSV_HEADER = "kind,class_kv,mva_rating,x_pu_own,r_pu_own,x_pu_common,r_pu_common,xr"


def _cell(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def params_csv(items) -> str:
    """Plot-ready CSV; own-base columns are empty for lines."""
    lines = [PARAMS_CSV_HEADER]
    for p in items:
        lines.append(
            f"{p.kind.value},{_cell(p.class_kv)},{_cell(p.mva_rating)},{_cell(p.x_pu_own)},"
            f"{_cell(p.r_pu_own)},{_cell(p.x_pu_common)},{_cell(p.r_pu_common)},{_cell(p.xr)}"
        )
    return "\n".join(lines) + "\n"


def params_to_branch_records(items, system_mva_base: float, *, lv_kv: float = 13.8):
    """Wrap generated parameters as branch records on fresh buses, so a
    generated population can round-trip through the analysis pipeline.

    Transformers get a high/low voltage pair (tap 1.0); lines connect two
    buses at the class voltage (tap 0). Impedances are common-base, as
    branch records require.
    """
    if not system_mva_base > 0:
        raise ValueError(f"system_mva_base must be > 0, got {system_mva_base}")
    records = []
    for i, p in enumerate(items):
        xfmr = is_transformer(p.kind)
        if xfmr and not lv_kv < p.class_kv:
            raise ValueError(f"lv_kv {lv_kv} must be below class_kv {p.class_kv}")
        prefix = "T" if xfmr else "L"
        records.append(
            BranchRecord(
                id=f"{prefix}{p.class_kv:g}-{i + 1}",
                from_bus=2 * i + 1,
                to_bus=2 * i + 2,
                from_kv=p.class_kv,
                to_kv=lv_kv if xfmr else p.class_kv,
                r_pu=p.r_pu_common,
                x_pu=p.x_pu_common,
                mva_rating=p.mva_rating,
                tap_ratio=1.0 if xfmr else 0.0,
                system_mva_base=system_mva_base,
            )
        )
    return records
