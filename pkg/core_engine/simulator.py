"""
Reproducible Monte Carlo for the anisotropic walk

Two engines produce the same law: a direct per-step sampler and the
geometric-run construction, which interleaves horizontal runs of length
Geom(2 p_j) with single vertical steps. Both record local times from the first
step on; the starting site is not counted.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import Engine, get_settings
from core_engine import kernels
from core_engine.error_handling import GammaNotAboveOne, InvalidGrid
from core_engine.exact_engine import expected_horizontal_steps
from core_engine.logging_config import get_logger
from core_engine.profiles import StepProfile, gamma_of

logger = get_logger(__name__)

Site = Tuple[int, int]
ORIGIN: Site = (0, 0)


@dataclass
class SimRecord:
    """Summary of one simulated trajectory"""
    n_steps: int
    final: Site
    h_n: int
    v_n: int
    local_time: Dict[Site, int]
    seed: int
    engine: Engine = Engine.DIRECT
    overshoot: Optional[int] = None

    @property
    def origin_local_time(self) -> int:
        return self.local_time.get(ORIGIN, 0)


@dataclass
class ReplicaBatch:
    """R independent records with seeds derived from base_seed"""
    profile: StepProfile
    n_steps: int
    base_seed: int
    engine: Engine
    records: List[SimRecord] = field(default_factory=list)
    sites: Optional[List[Site]] = None

    @property
    def replicas(self) -> int:
        return len(self.records)

    def tracked_sites(self) -> List[Site]:
        """Sites given their own column, origin first"""
        extra = [s for s in (self.sites or []) if s != ORIGIN]
        return [ORIGIN] + extra

    def local_times(self, site: Site) -> np.ndarray:
        return np.array([r.local_time.get(site, 0) for r in self.records], dtype=np.int64)

    def to_frame(self) -> pd.DataFrame:
        """One row per replica: replica,seed,final_x,final_y,h_n,v_n,lt_origin,lt_k_j..."""
        rows = []
        for idx, rec in enumerate(self.records):
            row = {
                "replica": idx,
                "seed": rec.seed,
                "final_x": rec.final[0],
                "final_y": rec.final[1],
                "h_n": rec.h_n,
                "v_n": rec.v_n,
                "lt_origin": rec.origin_local_time,
            }
            for k, j in self.tracked_sites()[1:]:
                row[f"lt_{k}_{j}"] = rec.local_time.get((k, j), 0)
            rows.append(row)
        columns = ["replica", "seed", "final_x", "final_y", "h_n", "v_n", "lt_origin"] + [
            f"lt_{k}_{j}" for k, j in self.tracked_sites()[1:]
        ]
        return pd.DataFrame(rows, columns=columns)


@dataclass
class HnStatistics:
    """Horizontal step count H_N across a batch"""
    n_steps: int
    mean: float
    std_error: float
    gamma_star: float
    deviation: float
    normalized_deviation: float
    rho: float
    tail_threshold: float
    tail_frequency: float
    tail_bound: float
    ci: Tuple[float, float]
    exact_mean: Optional[float] = None
    exact_z: Optional[float] = None


@dataclass
class LemmaFResult:
    max_abs: int
    violations: int
    paths: int
    length: int


def derive_seed(base_seed: int, replica: int) -> int:
    """Injective 64-bit seed for replica r of a batch"""
    seq = np.random.SeedSequence(base_seed, spawn_key=(replica,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class LocalTimeCounter:
    """Accumulates site visit counts chunk by chunk"""

    def __init__(self, sites: Optional[Sequence[Site]] = None):
        self.sites = None if sites is None else sorted(set(sites) | {ORIGIN})
        self.counts: Counter = Counter()

    def update(self, xs: np.ndarray, ys: np.ndarray):
        if xs.size == 0:
            return
        if self.sites is None:
            visited, counts = np.unique(np.stack([xs, ys], axis=1), axis=0, return_counts=True)
            for (k, j), c in zip(visited.tolist(), counts.tolist()):
                self.counts[(k, j)] += c
            return
        for k, j in self.sites:
            c = int(np.count_nonzero((xs == k) & (ys == j)))
            if c:
                self.counts[(k, j)] += c

    def as_dict(self) -> Dict[Site, int]:
        out = dict(self.counts)
        if self.sites is not None:
            for site in self.sites:
                out.setdefault(site, 0)
        return out


def sample_geometric(rng: np.random.Generator, alpha: float) -> int:
    """Draw k >= 0 with P(k) = alpha (1 - alpha)^k by inversion"""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return 0
    u = 1.0 - rng.random()
    return kernels.geometric_from_uniform(u, alpha)


def geometric_moments(alpha: float) -> Tuple[float, float]:
    """Mean (1 - alpha)/alpha and variance (1 - alpha)/alpha^2"""
    return (1.0 - alpha) / alpha, (1.0 - alpha) / alpha ** 2


def truncated_geometric_variance(alpha: float, cutoff: int) -> float:
    """
    Variance of min(G, L) for G ~ Geom(alpha) by finite summation

    P(k) = alpha (1 - alpha)^k for k < L and P(L) = (1 - alpha)^L.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be non-negative, got {cutoff}")
    k = np.arange(cutoff + 1, dtype=np.float64)
    probs = alpha * (1.0 - alpha) ** k
    probs[-1] = (1.0 - alpha) ** cutoff
    mean = float(np.dot(probs, k))
    return max(0.0, float(np.dot(probs, k * k)) - mean * mean)


def _check_steps(n_steps: int):
    if n_steps < 0:
        raise InvalidGrid(f"n_steps must be non-negative, got {n_steps}")


def simulate_direct(
    profile: StepProfile,
    n_steps: int,
    seed: int,
    sites: Optional[Sequence[Site]] = None,
    chunk_size: Optional[int] = None,
) -> SimRecord:
    """Per-step sampler, one uniform draw per step"""
    _check_steps(n_steps)
    chunk_size = chunk_size or get_settings().simulation.chunk_size
    args = profile.kernel_args()
    rng = np.random.default_rng(seed)
    counter = LocalTimeCounter(sites)
    x = y = h = 0

    done = 0
    while done < n_steps:
        size = min(chunk_size, n_steps - done)
        uniforms = rng.random(size)
        xs = np.empty(size, dtype=np.int64)
        ys = np.empty(size, dtype=np.int64)
        x, y, dh = kernels.direct_chunk(x, y, uniforms, *args, xs, ys)
        h += dh
        counter.update(xs, ys)
        done += size

    return SimRecord(
        n_steps=n_steps,
        final=(int(x), int(y)),
        h_n=int(h),
        v_n=int(n_steps - h),
        local_time=counter.as_dict(),
        seed=seed,
        engine=Engine.DIRECT,
    )


def _refill(rng: np.random.Generator, buf: np.ndarray, used: int, size: int, positive: bool = False) -> np.ndarray:
    fresh = rng.random(size)
    if positive:
        fresh = 1.0 - fresh
    return np.concatenate([buf[used:], fresh])


def simulate_embedding(
    profile: StepProfile,
    n_steps: int,
    seed: int,
    sites: Optional[Sequence[Site]] = None,
    chunk_size: Optional[int] = None,
) -> SimRecord:
    """
    Geometric-run construction, stopped exactly after n_steps

    The in-flight run is cut at the step budget; its unfinished remainder is
    stored as ``overshoot`` (the gap between H_N and the completed-run count).
    """
    _check_steps(n_steps)
    chunk_size = chunk_size or get_settings().simulation.chunk_size
    args = profile.kernel_args()
    h_rng, v_rng, g_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))
    counter = LocalTimeCounter(sites)
    state = kernels.new_embedding_state()
    hbuf = np.empty(0)
    vbuf = np.empty(0)
    gbuf = np.empty(0)

    done = 0
    while done < n_steps:
        size = min(chunk_size, n_steps - done)
        # one draw per stream per step at most
        if state[4] >= hbuf.size:
            hbuf, state[4] = _refill(h_rng, hbuf, state[4], size), 0
        if state[5] >= vbuf.size:
            vbuf, state[5] = _refill(v_rng, vbuf, state[5], size), 0
        if state[6] >= gbuf.size:
            gbuf, state[6] = _refill(g_rng, gbuf, state[6], size, positive=True), 0
        xs = np.empty(size, dtype=np.int64)
        ys = np.empty(size, dtype=np.int64)
        taken = kernels.embedding_chunk(state, size, hbuf, vbuf, gbuf, *args, xs, ys)
        counter.update(xs[:taken], ys[:taken])
        done += taken

    h = int(state[7])
    return SimRecord(
        n_steps=n_steps,
        final=(int(state[0]), int(state[1])),
        h_n=h,
        v_n=n_steps - h,
        local_time=counter.as_dict(),
        seed=seed,
        engine=Engine.EMBEDDING,
        overshoot=int(state[2]),
    )


_ENGINES = {
    Engine.DIRECT: simulate_direct,
    Engine.EMBEDDING: simulate_embedding,
}


def _simulate_one(engine: Engine, profile: StepProfile, n_steps: int, seed: int, sites):
    return _ENGINES[engine](profile, n_steps, seed, sites)


def run_replicas(
    profile: StepProfile,
    n_steps: int,
    replicas: int,
    base_seed: int,
    sites: Optional[Sequence[Site]] = None,
    engine: Engine = Engine.DIRECT,
    n_jobs: Optional[int] = None,
) -> ReplicaBatch:
    """
    R independent trajectories; replica r uses derive_seed(base_seed, r)

    Records are stored in replica order whatever the worker scheduling.
    """
    if replicas < 1:
        raise InvalidGrid(f"replica count must be at least 1, got {replicas}")
    _check_steps(n_steps)
    engine = Engine(engine)
    n_jobs = n_jobs if n_jobs is not None else get_settings().simulation.n_jobs
    site_list = None if sites is None else list(sites)
    seeds = [derive_seed(base_seed, r) for r in range(replicas)]

    logger.info(
        f"Running {replicas} replica(s) of {n_steps} steps, engine={engine.value}, "
        f"base_seed={base_seed}, n_jobs={n_jobs}"
    )
    records = Parallel(n_jobs=n_jobs)(
        delayed(_simulate_one)(engine, profile, n_steps, seed, site_list) for seed in seeds
    )
    return ReplicaBatch(
        profile=profile,
        n_steps=n_steps,
        base_seed=base_seed,
        engine=engine,
        records=list(records),
        sites=site_list,
    )


def final_position_counts(batch: ReplicaBatch) -> Counter:
    """Histogram of final positions"""
    return Counter(rec.final for rec in batch.records)


def overshoot_exceedances(batch: ReplicaBatch, delta: float) -> int:
    """Number of records whose in-flight horizontal remainder exceeds N^delta"""
    if batch.engine != Engine.EMBEDDING:
        raise ValueError("overshoot is only recorded by the embedding engine")
    threshold = batch.n_steps ** delta
    return sum(1 for rec in batch.records if rec.overshoot > threshold)


def hn_statistics(batch: ReplicaBatch, rho: Optional[float] = None) -> HnStatistics:
    """
    Compare the horizontal step count H_N with gamma* N

    Reports the mean with a normal 95% interval, |mean - gamma* N| and its N^(3/4)
    normalisation, the frequency of |H_N - gamma* N| > N^(1-rho) next to the order
    bound 2/(N^(1-2 rho) omega^2), and the exact E[H_N] when N is small enough.
    """
    if not batch.records:
        raise InvalidGrid("hn_statistics needs a non-empty batch")
    profile = batch.profile
    gamma = gamma_of(profile)
    if gamma <= 1.0:
        raise GammaNotAboveOne(f"H_N concentration needs gamma > 1, got {gamma}")
    rho = rho if rho is not None else get_settings().analysis.hn_rho
    n = batch.n_steps
    gamma_star = (gamma - 1.0) / gamma

    h = np.array([rec.h_n for rec in batch.records], dtype=np.float64)
    mean = float(h.mean())
    std_error = float(h.std(ddof=1) / math.sqrt(h.size)) if h.size > 1 else math.nan
    deviation = abs(mean - gamma_star * n)
    threshold = n ** (1.0 - rho)
    tail = float(np.mean(np.abs(h - gamma_star * n) > threshold))
    bound = 2.0 / (n ** (1.0 - 2.0 * rho) * profile.omega ** 2) if n > 0 else math.inf

    exact_mean = exact_z = None
    if n <= get_settings().simulation.exact_moment_max_steps:
        exact_mean = expected_horizontal_steps(profile, n)
        if std_error and std_error > 0:
            exact_z = (mean - exact_mean) / std_error

    return HnStatistics(
        n_steps=n,
        mean=mean,
        std_error=std_error,
        gamma_star=gamma_star,
        deviation=deviation,
        normalized_deviation=deviation / n ** 0.75 if n > 0 else 0.0,
        rho=rho,
        tail_threshold=threshold,
        tail_frequency=tail,
        tail_bound=bound,
        ci=(mean - 1.96 * std_error, mean + 1.96 * std_error),
        exact_mean=exact_mean,
        exact_z=exact_z,
    )


def simple_walk_path(rng: np.random.Generator, length: int) -> np.ndarray:
    """S_0 = 0, S_1, ..., S_length of a simple symmetric walk"""
    steps = np.where(rng.random(length) < 0.5, 1, -1)
    return np.concatenate([[0], np.cumsum(steps)])


def lemma_f_check(path: np.ndarray, level: int) -> int:
    """
    max over n of |D(i, n)| for a +-1 path S_0..S_L

    D(i, n) = xi(i+1, n) - xi(i, n) - sum_{l<=n} I(S_l in {i, i+1}) X_{l+1}, where
    xi(k, n) counts visits to k among S_1..S_n. The sum needs X_{n+1}, so n runs
    over 0..L-1.
    """
    s = np.asarray(path, dtype=np.int64)
    if s.size < 2:
        return 0
    steps = np.diff(s)
    upper = np.concatenate(([0], np.cumsum(s[1:-1] == level + 1)))
    lower = np.concatenate(([0], np.cumsum(s[1:-1] == level)))
    inside = (s[:-1] == level) | (s[:-1] == level + 1)
    drift = np.cumsum(inside * steps)
    return int(np.max(np.abs(upper - lower - drift)))


def lemma_f_sweep(n_paths: int, length: int, levels: Sequence[int], seed: int) -> LemmaFResult:
    """Run lemma_f_check over freshly simulated paths and count |D| > 2"""
    rng = np.random.default_rng(seed)
    worst = 0
    violations = 0
    for _ in range(n_paths):
        path = simple_walk_path(rng, length)
        for level in levels:
            d = lemma_f_check(path, level)
            worst = max(worst, d)
            if d > 2:
                violations += 1
    if violations:
        logger.warning(f"lemma_f_sweep: {violations} path/level pair(s) exceeded |D| <= 2")
    return LemmaFResult(max_abs=worst, violations=violations, paths=n_paths, length=length)
