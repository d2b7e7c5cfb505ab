"""
Step-probability profiles p_j of the anisotropic walk and their averaged quantities

A walk sitting on the horizontal line y = j moves to either vertical neighbour with
probability p_j and to either horizontal neighbour with probability 1/2 - p_j.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import get_settings
from core_engine.error_handling import (
    AsymmetricTails,
    GammaNotAboveOneWarning,
    InvalidGrid,
    InvalidProfile,
    SidesDisagree,
)
from core_engine.logging_config import get_logger

logger = get_logger(__name__)


class ProfileKind(str, Enum):
    """Profile representations"""
    UNIFORM = "uniform"
    PERIODIC = "periodic"
    TABLE = "table"


# Kernel lookup modes: 0 = periodic table indexed by j mod L, 1 = window plus tails
KERNEL_PERIODIC = 0
KERNEL_TABLE = 1


@dataclass(frozen=True)
class StepProfile:
    """
    The map j -> p_j defining the walk.

    Uniform and Periodic store their period in ``values`` (length 1 for Uniform).
    Table stores p_j for j in [window_min, window_min + len(values) - 1] and the
    tail values used above (``tail_pos``) and below (``tail_neg``) the window.
    """
    kind: ProfileKind
    values: Tuple[float, ...]
    window_min: int = 0
    tail_pos: Optional[float] = None
    tail_neg: Optional[float] = None
    omega: Optional[float] = None
    _inf: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise InvalidProfile("profile needs at least one p value")
        if self.kind == ProfileKind.UNIFORM and len(values) != 1:
            raise InvalidProfile("uniform profile takes exactly one p value")

        listed = list(values)
        if self.kind == ProfileKind.TABLE:
            if self.tail_pos is None or self.tail_neg is None:
                raise InvalidProfile("table profile needs tail_pos and tail_neg")
            listed += [float(self.tail_pos), float(self.tail_neg)]

        for p in listed:
            if not (0.0 < p <= 0.5) or math.isnan(p):
                raise InvalidProfile(f"step probability {p} outside (0, 1/2]")

        inf_p = min(listed)
        object.__setattr__(self, "_inf", inf_p)
        if self.omega is None:
            object.__setattr__(self, "omega", inf_p)
        elif not (0.0 < self.omega <= inf_p):
            raise InvalidProfile(f"omega {self.omega} must lie in (0, inf p_j = {inf_p}]")

        if inf_p >= 0.5:
            logger.warning("all p_j equal 1/2: the walk lives on the vertical axis only")

    # -- constructors -----------------------------------------------------

    @classmethod
    def uniform(cls, p: float, omega: Optional[float] = None) -> "StepProfile":
        return cls(ProfileKind.UNIFORM, (p,), omega=omega)

    @classmethod
    def periodic(cls, values: Iterable[float], omega: Optional[float] = None) -> "StepProfile":
        return cls(ProfileKind.PERIODIC, tuple(values), omega=omega)

    @classmethod
    def table(
        cls,
        window_min: int,
        values: Iterable[float],
        tail_pos: float,
        tail_neg: float,
        omega: Optional[float] = None,
    ) -> "StepProfile":
        return cls(ProfileKind.TABLE, tuple(values), window_min, tail_pos, tail_neg, omega)

    @classmethod
    def comb(cls, p0: float = 0.25) -> "StepProfile":
        """Two-dimensional comb: only the line y = 0 has horizontal edges"""
        return cls.table(0, [p0], 0.5, 0.5)

    @classmethod
    def half_plane_half_comb(cls) -> "StepProfile":
        """Square lattice on y >= 0, comb teeth below"""
        return cls.table(0, [0.25], 0.25, 0.5)

    # -- accessors --------------------------------------------------------

    @property
    def period(self) -> int:
        return len(self.values)

    @property
    def p0(self) -> float:
        return p_at(self, 0)

    @property
    def infimum(self) -> float:
        return self._inf

    @property
    def is_degenerate(self) -> bool:
        """True when every p_j is 1/2 (one-dimensional walk)"""
        return self._inf >= 0.5

    def alpha(self, j: int) -> float:
        """Success probability 2 p_j of the horizontal-run geometric law on line j"""
        return 2.0 * p_at(self, j)

    def horizontal(self, j: int) -> float:
        return 0.5 - p_at(self, j)

    def kernel_args(self) -> Tuple[int, np.ndarray, int, float, float]:
        """Flat representation consumed by the compiled walk kernels"""
        arr = np.asarray(self.values, dtype=np.float64)
        if self.kind == ProfileKind.TABLE:
            return KERNEL_TABLE, arr, int(self.window_min), float(self.tail_pos), float(self.tail_neg)
        return KERNEL_PERIODIC, arr, 0, 0.0, 0.0

    def to_config(self) -> Dict:
        """Profile in the JSON config-file format"""
        if self.kind == ProfileKind.UNIFORM:
            return {"kind": "uniform", "p": self.values[0], "omega": self.omega}
        if self.kind == ProfileKind.PERIODIC:
            return {"kind": "periodic", "p": list(self.values), "omega": self.omega}
        return {
            "kind": "table",
            "window_min": self.window_min,
            "values": list(self.values),
            "tail_pos": self.tail_pos,
            "tail_neg": self.tail_neg,
            "omega": self.omega,
        }


@dataclass
class ProfileDiagnostics:
    """Averaged quantities of a profile"""
    gamma: float
    eta_estimate: float
    kappa_seq: np.ndarray
    beta_seq: np.ndarray
    gamma_star: float
    sigma: float
    mu_stenlund: float
    omega: float
    warnings: List[str] = field(default_factory=list)


@dataclass
class HeydeResult:
    """Outcome of the two-sided averaging check"""
    gamma_hat: float
    eta_hat: float
    residual_table: pd.DataFrame


def p_at(profile: StepProfile, j: int) -> float:
    """Step probability p_j on line y = j"""
    if profile.kind == ProfileKind.TABLE:
        k = j - profile.window_min
        if k < 0:
            return profile.tail_neg
        if k >= len(profile.values):
            return profile.tail_pos
        return profile.values[k]
    return profile.values[j % len(profile.values)]


def p_levels(profile: StepProfile, levels: np.ndarray) -> np.ndarray:
    """Vectorised p_at over an integer array of levels"""
    levels = np.asarray(levels, dtype=np.int64)
    arr = np.asarray(profile.values, dtype=np.float64)
    if profile.kind != ProfileKind.TABLE:
        return arr[np.mod(levels, arr.size)]
    idx = levels - profile.window_min
    inside = arr[np.clip(idx, 0, arr.size - 1)]
    return np.where(idx < 0, profile.tail_neg, np.where(idx >= arr.size, profile.tail_pos, inside))


def _gamma_fraction(profile: StepProfile) -> Fraction:
    if profile.kind == ProfileKind.TABLE:
        if profile.tail_pos != profile.tail_neg:
            raise AsymmetricTails(
                f"tails differ (p+ = {profile.tail_pos}, p- = {profile.tail_neg}); "
                "the upward and downward averages of 1/p_j have different limits"
            )
        return 1 / (2 * Fraction(profile.tail_pos))
    total = sum((1 / Fraction(p) for p in profile.values), Fraction(0))
    return total / (2 * len(profile.values))


def gamma_of(profile: StepProfile) -> float:
    """
    Exact limit gamma with 2 gamma = lim n^-1 sum_{j<=n} 1/p_{+-j}

    Emits GammaNotAboveOneWarning when gamma <= 1; the return-probability
    asymptotics need gamma > 1.
    """
    gamma = float(_gamma_fraction(profile))
    if gamma <= 1.0:
        message = f"gamma = {gamma} is not above 1"
        logger.warning(message)
        warnings.warn(message, GammaNotAboveOneWarning, stacklevel=2)
    return gamma


def _reciprocal_prefix_sums(profile: StepProfile, n_max: int, sign: int) -> List[Fraction]:
    """Exact sums sum_{k=1..n} 1/p_{sign k} for n = 1..n_max"""
    cache: Dict[float, Fraction] = {}
    sums: List[Fraction] = []
    running = Fraction(0)
    for k in range(1, n_max + 1):
        p = p_at(profile, sign * k)
        if p not in cache:
            cache[p] = 1 / Fraction(p)
        running += cache[p]
        sums.append(running)
    return sums


def kappa_beta(profile: StepProfile, j_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Prefix averages kappa_j = j^-1 sum_{k<=j} 1/p_k and beta_j = j^-1 sum_{k<=j} 1/p_{-k}

    Both arrays are indexed from j = 1 (element 0 is kappa_1).
    """
    if j_max < 1:
        raise InvalidGrid("j_max must be at least 1")
    plus = _reciprocal_prefix_sums(profile, j_max, +1)
    minus = _reciprocal_prefix_sums(profile, j_max, -1)
    kappa = np.array([float(s / j) for j, s in enumerate(plus, start=1)])
    beta = np.array([float(s / j) for j, s in enumerate(minus, start=1)])
    return kappa, beta


def lemma24_table(profile: StepProfile, j_max: int) -> pd.DataFrame:
    """Table of j |kappa_j - 2 gamma| and j |beta_j - 2 gamma|, bounded by C j^(1-eta)"""
    two_gamma = 2 * _gamma_fraction(profile)
    plus = _reciprocal_prefix_sums(profile, j_max, +1)
    minus = _reciprocal_prefix_sums(profile, j_max, -1)
    j = np.arange(1, j_max + 1)
    return pd.DataFrame({
        "j": j,
        "kappa_deviation": [float(abs(s - k * two_gamma)) for k, s in zip(j.tolist(), plus)],
        "beta_deviation": [float(abs(s - k * two_gamma)) for k, s in zip(j.tolist(), minus)],
    })


def _fit_eta(n: np.ndarray, residual: np.ndarray) -> float:
    keep = residual > 0
    if np.count_nonzero(keep) < 2:
        return math.inf
    x = -np.log(n[keep].astype(np.float64))
    y = np.log(residual[keep])
    slope = np.polyfit(x, y, 1)[0]
    return max(0.0, float(slope))


def check_heyde(profile: StepProfile, n_max: int, tolerance: Optional[float] = None) -> HeydeResult:
    """
    Check the two-sided averaging condition n^-1 sum 1/p_{+-j} = 2 gamma + o(n^-eta)

    gamma_hat is half the mean of both one-sided averages at n_max. eta_hat is the
    least-squares slope of log|average - 2 gamma_hat| against -log n over the upper
    half of the range, clamped at 0 (inf when the residuals vanish there).
    """
    if n_max < 100:
        raise InvalidGrid("check_heyde needs n_max >= 100")
    tolerance = tolerance if tolerance is not None else get_settings().analysis.sides_tolerance

    plus = _reciprocal_prefix_sums(profile, n_max, +1)
    minus = _reciprocal_prefix_sums(profile, n_max, -1)
    avg_plus_end = plus[-1] / n_max
    avg_minus_end = minus[-1] / n_max
    scale = (avg_plus_end + avg_minus_end) / 2
    if abs(avg_plus_end - avg_minus_end) > tolerance * scale:
        raise SidesDisagree(
            f"one-sided averages disagree at n = {n_max}: "
            f"{float(avg_plus_end):.6g} upward vs {float(avg_minus_end):.6g} downward",
            plus=float(avg_plus_end),
            minus=float(avg_minus_end),
        )

    two_gamma_hat = scale
    n = np.arange(1, n_max + 1)
    residual_plus = np.array([float(s / k - two_gamma_hat) for k, s in enumerate(plus, start=1)])
    residual_minus = np.array([float(s / k - two_gamma_hat) for k, s in enumerate(minus, start=1)])
    table = pd.DataFrame({
        "n": n,
        "kappa": [float(s / k) for k, s in enumerate(plus, start=1)],
        "beta": [float(s / k) for k, s in enumerate(minus, start=1)],
        "residual_plus": residual_plus,
        "residual_minus": residual_minus,
    })

    upper = n >= n_max // 2
    combined = np.maximum(np.abs(residual_plus), np.abs(residual_minus))
    eta_hat = _fit_eta(n[upper], combined[upper])
    gamma_hat = float(two_gamma_hat / 2)
    logger.debug(f"check_heyde: gamma_hat={gamma_hat}, eta_hat={eta_hat}, n_max={n_max}")
    return HeydeResult(gamma_hat=gamma_hat, eta_hat=eta_hat, residual_table=table)


def diagnose(profile: StepProfile, n_max: int = 10_000) -> ProfileDiagnostics:
    """Collect gamma, eta_hat, kappa/beta prefixes and derived constants"""
    notes: List[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gamma = gamma_of(profile)
    notes.extend(str(w.message) for w in caught)

    heyde = check_heyde(profile, n_max)
    if heyde.eta_hat <= 0.5:
        message = f"fitted eta {heyde.eta_hat:.3f} is not above 1/2"
        logger.warning(message)
        notes.append(message)

    return ProfileDiagnostics(
        gamma=gamma,
        eta_estimate=heyde.eta_hat,
        kappa_seq=heyde.residual_table["kappa"].to_numpy(),
        beta_seq=heyde.residual_table["beta"].to_numpy(),
        gamma_star=(gamma - 1.0) / gamma,
        sigma=1.0 / math.sqrt(gamma),
        mu_stenlund=2.0 * gamma,
        omega=float(profile.omega),
        warnings=notes,
    )


def invariant_measure_residual(profile: StepProfile, window: Iterable[int]) -> float:
    """
    Largest balance-equation residual of mu(k, j) = 1/p_j over the given levels

    The measure does not depend on k, so one column suffices.
    """
    worst = 0.0
    for j in window:
        p = p_at(profile, j)
        inflow = 2.0 * (1.0 / p) * (0.5 - p) + (1.0 / p_at(profile, j + 1)) * p_at(profile, j + 1) \
            + (1.0 / p_at(profile, j - 1)) * p_at(profile, j - 1)
        worst = max(worst, abs(1.0 / p - inflow))
    return worst
