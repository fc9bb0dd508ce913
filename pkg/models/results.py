"""Result records produced by the analyses"""

import math
from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class SphereTable:
    radius: int
    sizes: tuple[int, ...]
    growth_estimates: tuple[float, ...]

    @property
    def ball_size(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class CogrowthEstimate:
    """
    counts[i-1] is the number of reduced words of length i in the kernel
    of the marking; gamma_convention is set when no relation was seen
    and gamma_hat is the free-group convention sqrt(|S| - 1)
    """

    max_length: int
    counts: tuple[int, ...]
    gamma_hat: float
    gamma_convention: bool
    trend: tuple[float, ...] = ()


class Rigor(str, Enum):
    EXACT = "Exact"
    UPPER_CERTIFIED = "UpperCertified"
    DIVERGENT = "Divergent"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BoundResult:
    """
    Upper bound on the total variation distance

    For UpperCertified results value = 0.5 * sqrt(truncated_sum + tail_bound)
    """

    value: float
    rigor: Rigor
    truncation_radius: int
    truncated_sum: float = math.nan
    tail_bound: float = math.nan

    @property
    def certified(self) -> bool:
        return self.rigor in (Rigor.EXACT, Rigor.UPPER_CERTIFIED)


@dataclass(frozen=True)
class ClosedFormBound:
    """The displayed and the exactly recomputed closed-form upper bounds"""

    displayed: float
    exact: float


class Verdict(str, Enum):
    HAS_L2 = "HasL2"
    NO_L2 = "NoL2"
    NOT_BOUNDED = "NotBoundedOnLGamma"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DensityVerdict:
    """
    margin is the slack of the inequality that decided the verdict
    (positive when the verdict is HasL2 or NoL2); the window records the
    radii standing in for the liminf
    """

    verdict: Verdict
    margin: float
    threshold: float
    window: tuple[int, int]
    not_bounded_on_l_gamma: bool = False
    note: str = "finite window min/max approximates liminf"


@dataclass(frozen=True)
class LowerBound:
    value: float
    kind: str


@dataclass
class CutoffWindow:
    family_param: int
    predicted_location: float
    k_upper: int | None
    k_lower: int | None
    lower_kind: str | None = None
    window_low: float | None = None
    window_high: float | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def upper_offset(self) -> float | None:
        if self.k_upper is None:
            return None
        return self.k_upper - self.predicted_location

    @property
    def lower_offset(self) -> float | None:
        if self.k_lower is None:
            return None
        return self.predicted_location - self.k_lower

    def as_dict(self) -> dict:
        return {
            "family_param": self.family_param,
            "predicted_location": self.predicted_location,
            "k_upper": self.k_upper,
            "k_lower": self.k_lower,
            "lower_kind": self.lower_kind,
            "upper_offset": self.upper_offset,
            "lower_offset": self.lower_offset,
            "window_low": self.window_low,
            "window_high": self.window_high,
            "flags": ";".join(self.flags),
        }


@dataclass
class ScanResult:
    windows: list[CutoffWindow]
    max_upper_offset: float | None
    max_lower_offset: float | None
    no_cutoff: bool

    def summary_line(self) -> str:
        def fmt(value):
            return "undefined" if value is None else f"{value:.6f}"

        return (
            f"max_upper_offset={fmt(self.max_upper_offset)} "
            f"max_lower_offset={fmt(self.max_lower_offset)} "
            f"{'NO-CUTOFF' if self.no_cutoff else 'CUTOFF-CANDIDATE'}"
        )


CSV_FIELDS = (
    "family_param",
    "k",
    "upper_l2",
    "upper_closed_paper",
    "upper_closed_exact",
    "lower_best",
    "lower_kind",
    "density_verdict",
    "truncation_radius",
    "tail_bound",
)


@dataclass(frozen=True)
class CsvRow:
    family_param: int | None
    k: int
    upper_l2: float
    upper_closed_paper: float | None
    upper_closed_exact: float | None
    lower_best: float | None
    lower_kind: str | None
    density_verdict: str
    truncation_radius: int
    tail_bound: float

    def sort_key(self) -> tuple:
        return (self.family_param if self.family_param is not None else -1, self.k)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_FIELDS}


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    max_deviation: float
    tolerance: float
    checked: int

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


WINDOW_FIELDS = (
    "family_param",
    "predicted_location",
    "k_upper",
    "k_lower",
    "lower_kind",
    "upper_offset",
    "lower_offset",
    "window_low",
    "window_high",
    "flags",
)

COGROWTH_FIELDS = ("family_param", "length", "count", "gamma_hat")

PSD_FIELDS = ("family_param", "size", "min_eigenvalue", "psd")

VERIFY_FIELDS = ("family_param", "name", "max_deviation", "tolerance", "checked", "passed")
