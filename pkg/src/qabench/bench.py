"""Success metrics, optimal-stopping reward, Bayesian bootstrap intervals,
gauge averaging, anneal-time scans, and scaling fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .instances import (
    IsingInstance,
    apply_gauge_to_states,
    gauge_transform,
    random_gauges,
)
from .solvers import SampleSet, Solver, SolverConfig, solve_exact

UNSOLVED = math.inf


def is_unsolved(value: float) -> bool:
    """True for the marker used when no repetition found the target."""
    return math.isinf(value) and value > 0


def derive_seed(*parts: int) -> int:
    """Deterministic, well-mixed seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def success_prob(
    samples: SampleSet, ground_energy: float, tolerance: float = 0.0
) -> float:
    """Fraction of repetitions with energy <= ground_energy + tolerance."""
    if samples.n_reps == 0:
        raise ValueError("empty sample set has no success probability")
    return float(np.mean(samples.energies <= ground_energy + tolerance))


def tts(p: float, t_f: float, p_d: float = 0.99) -> float:
    """Time to solution at confidence p_d for per-run success probability p.

    t_f * max(1, ln(1-p_d)/ln(1-p)); p = 1 gives t_f, p = 0 gives UNSOLVED.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0.0 < p_d < 1.0:
        raise ValueError("p_d must lie strictly between 0 and 1")
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    if p == 0.0:
        return UNSOLVED
    if p == 1.0:
        return t_f
    return t_f * max(1.0, math.log1p(-p_d) / math.log1p(-p))


def ttt(
    samples: SampleSet,
    target_energy: float,
    t_f: float,
    p_d: float = 0.99,
    tolerance: float = 0.0,
) -> float:
    """Time to target: tts with p replaced by the fraction of repetitions at
    or below target_energy (+ tolerance)."""
    if samples.n_reps == 0:
        raise ValueError("empty sample set has no time to target")
    p = float(np.mean(samples.energies <= target_energy + tolerance))
    return tts(p, t_f, p_d)


@dataclass
class StoppingDecision:
    n_star: int
    expected_reward: float
    rewards: np.ndarray  # net reward for n = 1..budget


def stopping_reward(
    values: Sequence[float],
    cost_per_sample: float,
    budget: int | None = None,
) -> StoppingDecision:
    """Optimal fixed sample count under the with-recall reward
    E[max of n draws] - cost_per_sample * n, with the expectation taken over
    the empirical distribution of values. Ties prefer the larger n, so a zero
    cost always returns the full budget."""
    vals = np.sort(np.asarray(values, dtype=np.float64))
    m = len(vals)
    if m == 0:
        raise ValueError("need at least one observed value")
    if cost_per_sample < 0:
        raise ValueError("cost_per_sample must be >= 0")
    if budget is None:
        budget = m
    if budget < 1:
        raise ValueError("budget must be >= 1")
    cdf = np.arange(m + 1) / m
    ns = np.arange(1, budget + 1)
    # P(max <= v_(k)) = F(k)^n; E[max] telescopes over the sorted values
    powers = cdf[None, :] ** ns[:, None]  # (budget, m+1)
    expected_max = np.sum(vals[None, :] * (powers[:, 1:] - powers[:, :-1]), axis=1)
    net = expected_max - cost_per_sample * ns
    best = int(budget - 1 - np.argmax(net[::-1]))
    return StoppingDecision(
        n_star=int(ns[best]),
        expected_reward=float(net[best]),
        rewards=net,
    )


# ---------------------------------------------------------------------------
# Bayesian bootstrap
# ---------------------------------------------------------------------------


def weighted_mean(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(values, weights))


def weighted_success(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted mean of a 0/1 indicator vector, clipped into [0, 1].

    Resampling weights sum to 1 only up to rounding, so a dot product over
    all-ones indicators can land at 1 + eps; downstream consumers (``tts``)
    reject probabilities outside the unit interval.
    """
    return float(min(1.0, max(0.0, np.dot(values, weights))))


def weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Inverse-CDF quantile of a weighted sample: the smallest value whose
    cumulative weight reaches q. Infinite values sort to the top."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    idx = int(np.searchsorted(cum, q * cum[-1], side="left"))
    idx = min(idx, len(values) - 1)
    return float(values[order][idx])


@dataclass
class BootstrapInterval:
    lower: float
    upper: float
    level: float
    point: float
    flagged: bool = False


Statistic = Callable[[np.ndarray, np.ndarray], float]


def bayesian_bootstrap(
    values: Sequence[float],
    statistic: Statistic,
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> BootstrapInterval:
    """Central credible interval for a weighted statistic under Dirichlet(1,..,1)
    resampling weights.

    The statistic receives (values, weights) with weights summing to one.
    Fewer than two observations yield a flagged zero-width interval.
    """
    vals = np.asarray(values, dtype=np.float64)
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    uniform = np.full(len(vals), 1.0 / len(vals)) if len(vals) else vals
    if len(vals) < 2:
        if len(vals) == 0:
            raise ValueError("cannot bootstrap an empty sample")
        point = statistic(vals, uniform)
        return BootstrapInterval(point, point, level, point, flagged=True)
    point = statistic(vals, uniform)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(len(vals)), size=n_boot)
    stats = np.array([statistic(vals, w) for w in weights])
    tail = (1.0 - level) / 2.0
    if np.all(np.isfinite(stats)):
        lo, hi = np.quantile(stats, [tail, 1.0 - tail])
        flagged = False
    else:
        # infinite resamples (e.g. unsolved TTS): order statistics only, so
        # the bounds stay real numbers or the unsolved marker, never nan
        lo, hi = np.quantile(stats, [tail, 1.0 - tail], method="nearest")
        flagged = True
    return BootstrapInterval(float(lo), float(hi), level, point, flagged=flagged)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class BenchReport:
    """Uniform result container for metrics and scans. CI bounds are ordered
    and widened, if necessary, to contain the point estimate."""

    metric: str
    estimate: float
    ci_lower: float
    ci_upper: float
    ci_level: float
    flags: list[str] = field(default_factory=list)
    axis_name: str | None = None
    axis: list[float] | None = None
    point_values: list[float] | None = None
    point_lower: list[float] | None = None
    point_upper: list[float] | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if math.isfinite(self.estimate):
            if math.isfinite(self.ci_lower):
                self.ci_lower = min(self.ci_lower, self.estimate)
            if math.isfinite(self.ci_upper):
                self.ci_upper = max(self.ci_upper, self.estimate)
        if (
            math.isfinite(self.ci_lower)
            and math.isfinite(self.ci_upper)
            and self.ci_lower > self.ci_upper
        ):
            raise ValueError("confidence bounds out of order")


# ---------------------------------------------------------------------------
# gauge averaging
# ---------------------------------------------------------------------------


@dataclass
class GaugeAverageResult:
    samples: SampleSet  # pooled, mapped back to the original frame
    gauges: np.ndarray
    per_gauge_success: np.ndarray | None = None

    def success_dispersion(self) -> float:
        if self.per_gauge_success is None:
            raise ValueError("no ground energy was supplied")
        return float(np.max(self.per_gauge_success) - np.min(self.per_gauge_success))


def gauge_average(
    instance: IsingInstance,
    solver: Solver,
    config: SolverConfig,
    n_gauges: int,
    seed: int = 0,
    ground_energy: float | None = None,
    tolerance: float = 0.0,
) -> GaugeAverageResult:
    """Run a solver under n_gauges random gauge transforms and pool the
    samples in the original frame.

    Gauge g runs at config.seed + g, so a single (identity) gauge reproduces
    a plain solver call bit for bit. If a ground energy is supplied (or known
    to the instance), per-gauge success probabilities are recorded.
    """
    gauges = random_gauges(instance.n, n_gauges, seed)
    if ground_energy is None:
        ground_energy = instance.known_ground_energy
    parts = []
    successes = []
    for g in range(n_gauges):
        gauged = gauge_transform(instance, gauges[g])
        cfg = replace(config, seed=config.seed + g)
        raw = solver(gauged, cfg)
        back = apply_gauge_to_states(raw.states, gauges[g])
        part = SampleSet.from_states(
            instance,
            back,
            raw.solver,
            dict(raw.parameters, gauge_index=g),
            seed=cfg.seed,
            wall_times=raw.wall_times,
        )
        parts.append(part)
        if ground_energy is not None:
            successes.append(success_prob(part, ground_energy, tolerance))
    pooled = SampleSet.concatenate(parts)
    pooled.parameters["gauges"] = n_gauges
    return GaugeAverageResult(
        samples=pooled,
        gauges=gauges,
        per_gauge_success=np.array(successes) if successes else None,
    )


def resolve_ground_energy(
    instance: IsingInstance, max_component_size: int = 30
) -> float:
    """known_ground_energy if declared, else exhaustive search."""
    if instance.known_ground_energy is not None:
        return instance.known_ground_energy
    return solve_exact(instance, max_component_size=max_component_size).ground_energy


# ---------------------------------------------------------------------------
# scans and fits
# ---------------------------------------------------------------------------


def optimal_tf_scan(
    instances: Sequence[IsingInstance],
    solver: Solver,
    config: SolverConfig,
    sweeps_grid: Sequence[int],
    p_d: float = 0.99,
    percentile: float = 0.5,
    time_per_sweep: float = 1.0,
    tolerance: float = 0.0,
    n_boot: int = 500,
    level: float = 0.95,
    seed: int = 0,
) -> BenchReport:
    """Scan the anneal length and report the sweep count minimizing the
    percentile TTS over the instance pool.

    Each (instance, grid point) pair runs on its own derived seed. A point
    where the percentile lands on unsolved instances becomes an unsolved
    marker; an optimum at the grid edge is flagged "boundary-optimum"
    because no interior optimum was demonstrated, and a scan with no finite
    point is flagged "insufficient-samples".
    """
    if not instances:
        raise ValueError("need at least one instance")
    if not sweeps_grid:
        raise ValueError("need at least one grid point")
    if any(int(s) < 1 for s in sweeps_grid):
        raise ValueError("grid sweep counts must be >= 1")
    grounds = [resolve_ground_energy(inst) for inst in instances]
    stat = lambda v, w: weighted_quantile(v, w, percentile)
    axis, values, lowers, uppers = [], [], [], []
    for point_idx, sweeps in enumerate(sweeps_grid):
        t_f = float(sweeps) * time_per_sweep
        per_instance = []
        for inst_idx, (inst, ground) in enumerate(zip(instances, grounds)):
            cfg = replace(
                config,
                sweeps=int(sweeps),
                seed=derive_seed(config.seed, inst_idx, point_idx),
            )
            samples = solver(inst, cfg)
            p = success_prob(samples, ground, tolerance)
            per_instance.append(tts(p, t_f, p_d))
        per_instance = np.asarray(per_instance)
        est = weighted_quantile(
            per_instance, np.full(len(per_instance), 1.0 / len(per_instance)),
            percentile,
        )
        if math.isfinite(est):
            ci = bayesian_bootstrap(
                per_instance, stat, n_boot=n_boot, level=level,
                seed=derive_seed(seed, point_idx),
            )
            lo, hi = ci.lower, ci.upper
        else:
            est, lo, hi = UNSOLVED, UNSOLVED, UNSOLVED
        axis.append(float(sweeps))
        values.append(float(est))
        lowers.append(float(lo))
        uppers.append(float(hi))

    finite = [t for t, v in enumerate(values) if math.isfinite(v)]
    flags = []
    if not finite:
        flags.append("insufficient-samples")
        best = 0
        estimate, lo, hi = UNSOLVED, UNSOLVED, UNSOLVED
    else:
        best = min(finite, key=lambda t: values[t])
        estimate, lo, hi = values[best], lowers[best], uppers[best]
        if best == 0 or best == len(values) - 1:
            flags.append("boundary-optimum")
    return BenchReport(
        metric="optimal_tf",
        estimate=estimate,
        ci_lower=lo,
        ci_upper=hi,
        ci_level=level,
        flags=flags,
        axis_name="sweeps",
        axis=axis,
        point_values=values,
        point_lower=lowers,
        point_upper=uppers,
        details={"best_sweeps": axis[best], "percentile": percentile, "p_d": p_d},
    )


def scaling_fit(
    sizes: Sequence[float],
    tts_by_size: Sequence[Sequence[float]],
    percentile: float = 0.5,
    size_transform: str = "identity",
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> BenchReport:
    """Least-squares slope of log(percentile TTS) against (transformed) size,
    with a bootstrap CI from per-size Dirichlet reweighting.

    Unsolved TTS values poison an exponential fit, so any size containing one
    is rejected outright rather than silently dropped.
    """
    if len(sizes) != len(tts_by_size):
        raise ValueError("sizes and tts_by_size must align")
    if len(sizes) < 3:
        raise ValueError("need at least three sizes for a scaling fit")
    if size_transform not in ("identity", "sqrt"):
        raise ValueError("size_transform must be 'identity' or 'sqrt'")
    pools = [np.asarray(pool, dtype=np.float64) for pool in tts_by_size]
    bad = [str(sizes[k]) for k, pool in enumerate(pools) if np.any(~np.isfinite(pool))]
    if bad:
        raise ValueError(
            f"unsolved TTS values at sizes {', '.join(bad)}; an exponential "
            "fit over them would be meaningless"
        )
    if any(np.any(pool <= 0) for pool in pools):
        raise ValueError("TTS values must be positive")
    x = np.sqrt(np.asarray(sizes, float)) if size_transform == "sqrt" else np.asarray(
        sizes, float
    )
    med = np.array([
        weighted_quantile(pool, np.full(len(pool), 1.0 / len(pool)), percentile)
        for pool in pools
    ])
    slope, intercept = np.polyfit(x, np.log(med), 1)
    rng = np.random.default_rng(seed)
    slopes = np.empty(n_boot)
    for b in range(n_boot):
        y = np.empty(len(pools))
        for k, pool in enumerate(pools):
            w = rng.dirichlet(np.ones(len(pool)))
            y[k] = weighted_quantile(pool, w, percentile)
        slopes[b] = np.polyfit(x, np.log(y), 1)[0]
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(slopes, [tail, 1.0 - tail])
    return BenchReport(
        metric="scaling_slope",
        estimate=float(slope),
        ci_lower=float(lo),
        ci_upper=float(hi),
        ci_level=level,
        axis_name="size",
        axis=[float(v) for v in sizes],
        point_values=[float(v) for v in med],
        details={
            "intercept": float(intercept),
            "size_transform": size_transform,
            "percentile": percentile,
        },
    )
