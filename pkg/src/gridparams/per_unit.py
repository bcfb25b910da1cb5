"""Per-unit base conversions for branch impedances.

The general rebase is

    z_new = z_given * (v_base_given / v_base_new)**2 * (s_base_new / s_base_given)

With voltage bases chosen equal to nominal terminal voltages (the usual
zone convention) the voltage term drops and converting a common-base
reactance onto the equipment's own MVA rating is a pure power-base scaling.
All arithmetic is plain double precision; conversions are exact rational
scalings, so no snapping or tolerancing is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["BaseSpec", "rebase_impedance", "to_own_base", "xr_ratio"]


@dataclass(frozen=True)
class BaseSpec:
    """Voltage base in kV and power base in MVA."""

    v_base: float
    s_base: float

    def __post_init__(self):
        if not (math.isfinite(self.v_base) and self.v_base > 0):
            raise ValueError(f"v_base must be finite and > 0, got {self.v_base}")
        if not (math.isfinite(self.s_base) and self.s_base > 0):
            raise ValueError(f"s_base must be finite and > 0, got {self.s_base}")


def rebase_impedance(z_pu_given: float, given: BaseSpec, new: BaseSpec) -> float:
    """Re-express a per-unit impedance on a new (voltage, power) base."""
    if not math.isfinite(z_pu_given):
        raise ValueError(f"z_pu_given must be finite, got {z_pu_given}")
    return z_pu_given * (given.v_base / new.v_base) ** 2 * (new.s_base / given.s_base)


def to_own_base(x_pu_common: float, system_mva_base: float, mva_rating: float) -> float:
    """Convert a common-base reactance onto the equipment's own MVA rating.

    Assumes zone voltage bases equal nominal terminal voltages, so only the
    power-base term applies.
    """
    if not (math.isfinite(system_mva_base) and system_mva_base > 0):
        raise ValueError(f"system_mva_base must be > 0, got {system_mva_base}")
    if not (math.isfinite(mva_rating) and mva_rating > 0):
        raise ValueError(f"mva_rating must be > 0, got {mva_rating}")
    return x_pu_common * (mva_rating / system_mva_base)


def xr_ratio(r_pu: float, x_pu: float) -> float:
    """X/R of a branch; invariant under any common base conversion."""
    if not (math.isfinite(r_pu) and r_pu > 0):
        raise ValueError(f"r_pu must be > 0, got {r_pu}")
    return x_pu / r_pu
