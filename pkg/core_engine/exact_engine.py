"""
Exact finite-step laws of the anisotropic walk

Dynamic-programming sweeps over the vertical chain and over the pair
(vertical level, number of horizontal steps), the origin-return probability
obtained from the latter, and path-enumeration oracles for small step counts.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy import special

from config import get_settings
from core_engine import kernels
from core_engine.error_handling import CapTooSmall, GammaNotAboveOne, InvalidGrid, TooLarge
from core_engine.logging_config import get_logger
from core_engine.profiles import StepProfile, gamma_of, p_at, p_levels

logger = get_logger(__name__)

LevelCap = Union[int, str, None]
AUTO = "AUTO"


@dataclass
class VerticalPmf:
    """Law of the vertical coordinate after n steps, stored over levels -cap..cap"""
    n: int
    level_cap: int
    mass: np.ndarray
    trunc_loss: float

    @property
    def levels(self) -> np.ndarray:
        return np.arange(-self.level_cap, self.level_cap + 1)

    def at(self, j: int) -> float:
        if abs(j) > self.level_cap:
            return 0.0
        return float(self.mass[j + self.level_cap])

    def as_dict(self) -> Dict[int, float]:
        """Nonzero entries keyed by level"""
        return {int(j): float(m) for j, m in zip(self.levels, self.mass) if m != 0.0}

    def total(self) -> float:
        return float(self.mass.sum())


@dataclass
class VerticalSweep:
    """Everything recorded by one pass of vertical_evolve"""
    pmf: VerticalPmf
    origin: np.ndarray             # P(C2(m) = 0), m = 0..n
    horizontal_rate: np.ndarray    # P(step m + 1 is horizontal), m = 0..n-1
    loss: np.ndarray               # cumulative truncation loss after m steps
    snapshots: Dict[int, VerticalPmf] = field(default_factory=dict)
    mass_drift: float = 0.0        # |sum(pmf) + loss - 1|


@dataclass
class JointPmf:
    """
    Law of (vertical level j, horizontal step count h) after n steps

    ``mass`` has shape (2 * level_cap + 1, n + 1) and is indexed [cap + j, h].
    """
    n: int
    level_cap: int
    mass: np.ndarray
    trunc_loss: float

    def at(self, j: int, h: int) -> float:
        if abs(j) > self.level_cap or not 0 <= h <= self.n:
            return 0.0
        return float(self.mass[j + self.level_cap, h])

    def vertical_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def horizontal_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    def horizontal_moments(self) -> Tuple[float, float]:
        """(E[H_n], Var[H_n]) over the retained mass"""
        weights = self.horizontal_marginal()
        h = np.arange(self.n + 1, dtype=np.float64)
        mean = float(np.dot(weights, h))
        second = float(np.dot(weights, h * h))
        return mean, max(0.0, second - mean * mean)


@dataclass
class ReturnSequence:
    """P(C(k) = (0,0)) for k = 0..two_n_max from a single joint sweep"""
    prob: np.ndarray
    loss: np.ndarray
    level_cap: int

    @property
    def error_bound(self) -> np.ndarray:
        k = np.arange(self.prob.size)
        return self.loss + k * 1e-12


@dataclass
class GreenFunction:
    """Cumulative origin-return probabilities g(N) = sum_{k<=N} P(C(k) = (0,0))"""
    steps: np.ndarray
    g: np.ndarray
    g_normalized: np.ndarray
    trunc_loss: float


def resolve_level_cap(n: int, level_cap: LevelCap = AUTO) -> int:
    """
    AUTO gives ceil(c sqrt(n ln n)) with c from WALK_CAP_CONSTANT, clipped to [1, n]

    No level beyond n is reachable in n steps, so a cap of n is lossless.
    """
    if level_cap is None or (isinstance(level_cap, str) and level_cap.upper() == AUTO):
        c = get_settings().exact.cap_constant
        raw = math.ceil(c * math.sqrt(n * math.log(n))) if n > 1 else 1
        return max(1, min(n, raw))
    cap = int(level_cap)
    if cap < 1:
        raise InvalidGrid(f"level cap must be at least 1, got {level_cap}")
    return cap


def _check_loss(loss: float, cap: int, n: int):
    limit = get_settings().exact.max_trunc_loss
    if loss > limit:
        raise CapTooSmall(trunc_loss=loss, level_cap=cap, n=n, limit=limit)


def vertical_evolve(
    profile: StepProfile,
    n: int,
    level_cap: LevelCap = AUTO,
    snapshots: Iterable[int] = (),
) -> VerticalSweep:
    """
    Sweep the lazy vertical chain for n steps

    new(j) = old(j)(1 - 2p_j) + old(j-1) p_{j-1} + old(j+1) p_{j+1}; mass stepping
    beyond +-level_cap is booked to the truncation loss and never renormalised.

    Raises:
        CapTooSmall: if the accumulated loss exceeds WALK_MAX_TRUNC_LOSS
    """
    if n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {n}")
    cap = resolve_level_cap(n, level_cap)
    size = 2 * cap + 1
    p = p_levels(profile, np.arange(-cap, cap + 1)).astype(np.float64)
    stay = 1.0 - 2.0 * p

    cur = np.zeros(size)
    nxt = np.zeros(size)
    cur[cap] = 1.0
    origin = np.empty(n + 1)
    rate = np.empty(n)
    loss = np.zeros(n + 1)
    wanted = set(int(s) for s in snapshots)
    taken: Dict[int, VerticalPmf] = {}
    if 0 in wanted:
        taken[0] = VerticalPmf(0, cap, cur.copy(), 0.0)
    origin[0] = 1.0

    started = time.perf_counter()
    lost = 0.0
    for m in range(n):
        w = min(cap, m)
        lo, hi = cap - w, cap + w + 1
        seg = cur[lo:hi]
        rate[m] = float(np.dot(seg, stay[lo:hi]))
        moved = seg * p[lo:hi]

        bottom, top = max(lo - 1, 0), min(hi + 1, size)
        nxt[bottom:top] = 0.0
        nxt[lo:hi] = seg * stay[lo:hi]
        nxt[lo + 1:top] += moved[:top - lo - 1]
        nxt[bottom:hi - 1] += moved[bottom + 1 - lo:]
        if hi == size:
            lost += moved[-1]
        if lo == 0:
            lost += moved[0]

        cur, nxt = nxt, cur
        origin[m + 1] = cur[cap]
        loss[m + 1] = lost
        if m + 1 in wanted:
            taken[m + 1] = VerticalPmf(m + 1, cap, cur.copy(), lost)

    drift = abs(float(cur.sum()) + lost - 1.0)
    budget = max(n, 1) * get_settings().exact.mass_tolerance
    if drift > budget:
        logger.warning(f"vertical_evolve: mass drift {drift:.3e} exceeds {budget:.3e} after {n} steps")
    logger.debug(
        f"vertical_evolve: n={n}, cap={cap}, loss={lost:.3e}, drift={drift:.3e}, "
        f"{time.perf_counter() - started:.2f}s"
    )
    _check_loss(lost, cap, n)
    return VerticalSweep(
        pmf=VerticalPmf(n, cap, cur.copy(), lost),
        origin=origin,
        horizontal_rate=rate,
        loss=loss,
        snapshots=taken,
        mass_drift=drift,
    )


def expected_horizontal_steps(profile: StepProfile, n: int, level_cap: LevelCap = AUTO) -> float:
    """E[H_n] = sum_{m<n} sum_j P(C2(m) = j)(1 - 2p_j), linear in n"""
    if n == 0:
        return 0.0
    sweep = vertical_evolve(profile, n, level_cap)
    return float(sweep.horizontal_rate.sum())


def ssrw_return(h: int) -> float:
    """
    P(simple symmetric walk is at 0 after h steps) = C(h, h/2) 2^-h

    Evaluated as Gamma(m + 1/2) / (sqrt(pi) Gamma(m + 1)) with m = h/2 through the
    Pochhammer symbol, which keeps the relative error below 1e-10 up to h ~ 1e7.
    """
    if h < 0:
        raise InvalidGrid(f"step count must be non-negative, got {h}")
    if h % 2:
        return 0.0
    if h == 0:
        return 1.0
    return float(special.poch(h // 2 + 1, -0.5) / math.sqrt(math.pi))


def ssrw_return_table(h_max: int) -> np.ndarray:
    """ssrw_return(h) for h = 0..h_max"""
    out = np.zeros(h_max + 1)
    m = np.arange(0, h_max // 2 + 1)
    out[0::2] = special.poch(m + 1, -0.5) / math.sqrt(math.pi)
    out[0] = 1.0
    return out


def _joint_sweep(profile: StepProfile, n: int, level_cap: LevelCap, record_returns: bool):
    cap = resolve_level_cap(n, level_cap)
    size = 2 * cap + 1
    p = p_levels(profile, np.arange(-cap, cap + 1)).astype(np.float64)
    stay = 1.0 - 2.0 * p

    cur = np.zeros((n + 1, size))
    nxt = np.zeros((n + 1, size))
    cur[0, cap] = 1.0
    ssrw = ssrw_return_table(n)
    returns = np.zeros(n + 1)
    loss = np.zeros(n + 1)
    returns[0] = 1.0

    started = time.perf_counter()
    lost = 0.0
    for m in range(n):
        lost += kernels.joint_step(cur, nxt, p, stay, cap, m)
        cur, nxt = nxt, cur
        loss[m + 1] = lost
        if record_returns and (m + 1) % 2 == 0:
            returns[m + 1] = kernels.origin_return(cur, ssrw, cap, m + 1)

    logger.debug(f"joint sweep: n={n}, cap={cap}, loss={lost:.3e}, {time.perf_counter() - started:.2f}s")
    _check_loss(lost, cap, n)
    return cur, cap, lost, returns, loss


def joint_evolve(profile: StepProfile, n: int, level_cap: LevelCap = AUTO) -> JointPmf:
    """
    Sweep the pair (level, horizontal count) for n steps

    new(j,h) = old(j,h-1)(1 - 2p_j) + old(j-1,h) p_{j-1} + old(j+1,h) p_{j+1}, with the
    truncation contract of vertical_evolve.
    """
    if n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {n}")
    mass, cap, lost, _, _ = _joint_sweep(profile, n, level_cap, record_returns=False)
    return JointPmf(n=n, level_cap=cap, mass=np.ascontiguousarray(mass.T), trunc_loss=lost)


def return_prob_sequence(profile: StepProfile, two_n_max: int, level_cap: LevelCap = AUTO) -> ReturnSequence:
    """P(C(k) = (0,0)) for every k <= two_n_max; odd k are 0"""
    if two_n_max < 0:
        raise InvalidGrid(f"step count must be non-negative, got {two_n_max}")
    _, cap, _, returns, loss = _joint_sweep(profile, two_n_max, level_cap, record_returns=True)
    return ReturnSequence(prob=returns, loss=loss, level_cap=cap)


def return_prob_exact(profile: StepProfile, two_n: int, level_cap: LevelCap = AUTO) -> float:
    """
    P(C(2N) = (0,0)) = sum_h P(C2(2N) = 0, H(2N) = h) P(S1(h) = 0)

    Given h horizontal steps the horizontal coordinate is an independent simple
    walk of h steps. Absolute error is at most trunc_loss + 2N * 1e-12.
    """
    if two_n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {two_n}")
    if two_n % 2:
        return 0.0
    if two_n == 0:
        return 1.0
    joint = joint_evolve(profile, two_n, level_cap)
    return _origin_sum(joint, lambda h: np.ones_like(h, dtype=bool))


def _origin_sum(joint: JointPmf, select) -> float:
    h = np.arange(joint.n + 1)
    weights = joint.mass[joint.level_cap] * ssrw_return_table(joint.n)
    return float(weights[select(h)].sum())


def return_prob_split(
    profile: StepProfile,
    two_n: int,
    rho: Optional[float] = None,
    level_cap: LevelCap = AUTO,
) -> Tuple[float, float]:
    """
    Split the return probability by the horizontal count h = 2r

    The first part collects |r - gamma* N| < N^(1 - rho), the second the rest.
    The two parts add up to return_prob_exact(profile, two_n).
    """
    if two_n <= 0 or two_n % 2:
        raise InvalidGrid(f"split needs a positive even step count, got {two_n}")
    rho = rho if rho is not None else get_settings().analysis.hn_rho
    gamma = gamma_of(profile)
    gamma_star = (gamma - 1.0) / gamma
    big_n = two_n // 2
    band = big_n ** (1.0 - rho)
    joint = joint_evolve(profile, two_n, level_cap)

    def in_band(h):
        return np.abs(h / 2.0 - gamma_star * big_n) < band

    inside = _origin_sum(joint, in_band)
    outside = _origin_sum(joint, lambda h: ~in_band(h))
    return inside, outside


def green_function(profile: StepProfile, n_max: int, level_cap: LevelCap = AUTO) -> GreenFunction:
    """
    g(N) for N = 0..n_max and g(N) 4 p0 pi sqrt(gamma - 1) / log N

    The normalised column is NaN for N <= 1 and when gamma <= 1.
    """
    if n_max < 0 or n_max % 2:
        raise InvalidGrid(f"green_function needs an even n_max >= 0, got {n_max}")
    return green_from_sequence(profile, return_prob_sequence(profile, n_max, level_cap))


def green_from_sequence(profile: StepProfile, seq: ReturnSequence) -> GreenFunction:
    """Green function built from an already computed return sequence"""
    n_max = seq.prob.size - 1
    g = np.cumsum(seq.prob)
    steps = np.arange(n_max + 1)
    gamma = gamma_of(profile)
    normalized = np.full(n_max + 1, np.nan)
    if gamma > 1.0 and n_max >= 2:
        factor = 4.0 * profile.p0 * math.pi * math.sqrt(gamma - 1.0)
        normalized[2:] = g[2:] * factor / np.log(steps[2:])
    return GreenFunction(steps=steps, g=g, g_normalized=normalized, trunc_loss=float(seq.loss[-1]))


def green_value(profile: StepProfile, n: int, level_cap: LevelCap = AUTO) -> Tuple[float, bool]:
    """
    g(n) at a single n, returned with a flag telling whether it was extrapolated

    Up to WALK_GREEN_EXACT_MAX_STEPS the value is exact. Beyond it the exact value
    at that limit is continued with the log n / (4 p0 pi sqrt(gamma - 1)) growth.
    """
    limit = get_settings().exact.green_exact_max_steps
    limit -= limit % 2
    if n <= limit:
        even = n - n % 2
        return float(green_function(profile, even, level_cap).g[-1]), False
    gamma = gamma_of(profile)
    if gamma <= 1.0:
        raise GammaNotAboveOne(f"cannot extrapolate g(n) with gamma = {gamma}")
    base = float(green_function(profile, limit, level_cap).g[-1])
    rate = 1.0 / (4.0 * profile.p0 * math.pi * math.sqrt(gamma - 1.0))
    logger.info(f"g({n}) extrapolated from the exact value at {limit}")
    return base + rate * (math.log(n) - math.log(limit)), True


# -- enumeration oracles ---------------------------------------------------------

def _moves(profile: StepProfile, y: int):
    p = p_at(profile, y)
    q = 0.5 - p
    return ((0, 1, p), (0, -1, p), (-1, 0, q), (1, 0, q))


def brute_force_return(profile: StepProfile, n: int) -> float:
    """
    P(C(n) = (0,0)) by summing over every step sequence that ends at the origin

    Branches that can no longer reach the origin in the remaining steps, or that
    carry zero probability, are pruned.
    """
    limit = get_settings().exact.brute_force_max_steps
    if n > limit:
        raise TooLarge(f"path enumeration is limited to n <= {limit}, got {n}")
    if n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {n}")

    def walk(x: int, y: int, left: int, weight: float) -> float:
        if abs(x) + abs(y) > left:
            return 0.0
        if left == 0:
            return weight
        total = 0.0
        for dx, dy, prob in _moves(profile, y):
            if prob > 0.0:
                total += walk(x + dx, y + dy, left - 1, weight * prob)
        return total

    return walk(0, 0, n, 1.0)


def brute_force_distribution(profile: StepProfile, n: int) -> Dict[Tuple[int, int], float]:
    """Exact law of C(n) by enumerating every step sequence"""
    limit = get_settings().exact.distribution_oracle_max_steps
    if n > limit:
        raise TooLarge(f"distribution enumeration is limited to n <= {limit}, got {n}")
    if n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {n}")

    law: Dict[Tuple[int, int], float] = {}

    def walk(x: int, y: int, left: int, weight: float):
        if left == 0:
            law[(x, y)] = law.get((x, y), 0.0) + weight
            return
        for dx, dy, prob in _moves(profile, y):
            if prob > 0.0:
                walk(x + dx, y + dy, left - 1, weight * prob)

    walk(0, 0, n, 1.0)
    return law


def brute_force_vertical(profile: StepProfile, n: int) -> Dict[int, float]:
    """Exact law of C2(n) by enumerating every stay/up/down sequence"""
    if n < 0:
        raise InvalidGrid(f"step count must be non-negative, got {n}")
    limit = get_settings().exact.brute_force_max_steps
    if n > limit:
        raise TooLarge(f"vertical enumeration is limited to n <= {limit}, got {n}")

    law: Dict[int, float] = {}

    def walk(y: int, left: int, weight: float):
        if left == 0:
            law[y] = law.get(y, 0.0) + weight
            return
        p = p_at(profile, y)
        for dy, prob in ((0, 1.0 - 2.0 * p), (1, p), (-1, p)):
            if prob > 0.0:
                walk(y + dy, left - 1, weight * prob)

    walk(0, n, 1.0)
    return law
