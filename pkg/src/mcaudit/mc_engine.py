"""Simulation core: sampling, replications, summaries, budgets, manifests.

A simulation run is a set of replications, each driven by its own
deterministically derived seed, producing one output value per
replication.  The run returns summary statistics plus a reproducibility
manifest: a plain-text record carrying everything needed to regenerate
the outputs bit for bit, including a digest of the outputs themselves.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ._version import __version__
from .errors import (BudgetExceeded, DomainError, EmptySample, InvalidSeed,
                     LengthMismatch, SampleTooSmall, ZeroVariance,
                     InsufficientSample)
from .rng_core import (GeneratorKind, GeneratorState, PeriodDescriptor,
                       default_conversion, new_generator, period_of)
from .special_functions import Probability, normal_inv

_log = logging.getLogger(__name__)

_MASK32 = 0xFFFFFFFF


# ---------------------------------------------------------------------------
# distributions and sampling

@dataclass(frozen=True)
class Uniform:
    """Continuous uniform on [a, b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise DomainError(f"uniform requires b > a, got [{self.a}, {self.b})")


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise DomainError(f"normal requires sigma > 0, got {self.sigma}")


@dataclass(frozen=True)
class Exponential:
    """Exponential with rate parameter (mean 1/rate)."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0.0:
            raise DomainError(f"exponential requires rate > 0, got {self.rate}")


@dataclass(frozen=True)
class Triangular:
    """Triangular on [a, b] with mode m."""

    a: float
    m: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a <= self.m <= self.b) or not self.b > self.a:
            raise DomainError(
                f"triangular requires a <= m <= b with a < b, "
                f"got ({self.a}, {self.m}, {self.b})")


Distribution = Uniform | Normal | Exponential | Triangular


def _unit_half_open(state: GeneratorState) -> float:
    # [0, 1) at the generator's native width
    return state.next_u32() / float(1 << state.kind.output_bits)


def _unit_open(state: GeneratorState) -> float:
    # (0, 1): keeps inverse-CDF transforms away from both endpoints
    return (state.next_u32() + 0.5) / float(1 << state.kind.output_bits)


def sample(state: GeneratorState, dist) -> float:
    """Draw one variate from ``dist`` by inverse-CDF transform.

    Consumes exactly one raw draw.  Each transform is monotone in the
    underlying uniform, so a stream ordering statement about the
    uniforms carries over to the variates.
    """
    if isinstance(dist, Uniform):
        return dist.a + (dist.b - dist.a) * _unit_half_open(state)
    if isinstance(dist, Normal):
        return dist.mu + dist.sigma * normal_inv(_unit_open(state))
    if isinstance(dist, Exponential):
        # -log1p(-u) equals -ln(1-u) without the 1-u cancellation
        return -math.log1p(-_unit_half_open(state)) / dist.rate
    if isinstance(dist, Triangular):
        u = _unit_half_open(state)
        span = dist.b - dist.a
        cut = (dist.m - dist.a) / span
        if u < cut:
            return dist.a + math.sqrt(u * span * (dist.m - dist.a))
        return dist.b - math.sqrt((1.0 - u) * span * (dist.b - dist.m))
    raise DomainError(f"unknown distribution {dist!r}")


# ---------------------------------------------------------------------------
# summaries

@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    stdev: float
    minimum: float
    maximum: float
    median: float
    mode: Optional[float]


def summarize(samples) -> SummaryStats:
    """Summary statistics over a nonempty sample.

    The mean is a compensated sum divided by n; the standard deviation
    is the sample (n-1) form computed from compensated squared
    deviations about that mean, which keeps both accurate even when the
    values are large and nearly equal.  The mode is the most frequent
    value (smallest wins a tie) or None when every value is unique;
    continuous data wanting a modal bin should go through the histogram
    instead.  With n = 1 the standard deviation is reported as 0.
    """
    vals = [float(x) for x in samples]
    n = len(vals)
    if n == 0:
        raise EmptySample("cannot summarize an empty sample")
    mean = math.fsum(vals) / n
    if n > 1:
        stdev = math.sqrt(math.fsum((x - mean) ** 2 for x in vals) / (n - 1))
    else:
        stdev = 0.0
    ordered = sorted(vals)
    mid = n // 2
    median = ordered[mid] if n % 2 else 0.5 * (ordered[mid - 1] + ordered[mid])
    counts = Counter(vals)
    peak = max(counts.values())
    mode = min(v for v, c in counts.items() if c == peak) if peak > 1 else None
    return SummaryStats(n=n, mean=mean, stdev=stdev, minimum=ordered[0],
                        maximum=ordered[-1], median=median, mode=mode)


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length series."""
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    if len(xs) != len(ys):
        raise LengthMismatch(f"series lengths differ: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 3:
        raise InsufficientSample(f"need at least 3 pairs, got {n}")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((a - mx) ** 2 for a in xs)
    syy = math.fsum((b - my) ** 2 for b in ys)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant series")
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def confidence_interval(stats: SummaryStats, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation confidence interval for the mean.

    mean +/- z * stdev / sqrt(n) with z the two-sided quantile for
    ``level``.  Requires n >= 30; below that the normal approximation
    is not defensible and SampleTooSmall is raised.
    """
    level = float(Probability(level))
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    if stats.n < 30:
        raise SampleTooSmall(
            f"normal-approximation interval needs n >= 30, got {stats.n}")
    z = normal_inv(1.0 - (1.0 - level) / 2.0)
    half = z * stats.stdev / math.sqrt(stats.n)
    return (stats.mean - half, stats.mean + half)


# ---------------------------------------------------------------------------
# period budgets

class BudgetPolicy(Enum):
    ENFORCE = "enforce"
    WARN = "warn"


@dataclass(frozen=True)
class BudgetRule:
    name: str
    max_draws: Optional[int]  # exact when the period is exact
    max_log2: float
    passed: bool


@dataclass(frozen=True)
class BudgetReport:
    requested_draws: int
    period_log2: float
    rules: tuple[BudgetRule, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rules)

    def failures(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rules if not r.passed)


def _int_cbrt(n: int) -> int:
    x = round(n ** (1.0 / 3.0))
    while (x + 1) ** 3 <= n:
        x += 1
    while x > 0 and x ** 3 > n:
        x -= 1
    return x


def budget_check(period: PeriodDescriptor, requested_draws: int) -> BudgetReport:
    """Check a draw count against three period-consumption rules.

    * ten-percent: draws may use at most one tenth of the period;
    * sqrt-200: the period must be at least 200 times the square of the
      draw count, i.e. draws <= sqrt(period / 200);
    * cube-root: draws <= period ** (1/3), the pair-structure budget.

    With an exact period every bound is exact integer arithmetic; when
    only log2 of the period is known the comparison happens in log2
    space, which is the honest representation for a period like
    2**19937 - 1.
    """
    if requested_draws < 0:
        raise DomainError(f"draw count must be nonnegative, got {requested_draws}")
    rules = []
    if period.exact is not None:
        bounds = (("ten-percent", period.exact // 10),
                  ("sqrt-200", math.isqrt(period.exact // 200)),
                  ("cube-root", _int_cbrt(period.exact)))
        for name, bound in bounds:
            log2b = math.log2(bound) if bound > 0 else float("-inf")
            rules.append(BudgetRule(name=name, max_draws=bound, max_log2=log2b,
                                    passed=requested_draws <= bound))
    else:
        L = period.log2_period
        bounds = (("ten-percent", L - math.log2(10.0)),
                  ("sqrt-200", (L - math.log2(200.0)) / 2.0),
                  ("cube-root", L / 3.0))
        for name, log2b in bounds:
            ok = requested_draws == 0 or math.log2(requested_draws) <= log2b
            rules.append(BudgetRule(name=name, max_draws=None, max_log2=log2b,
                                    passed=ok))
    return BudgetReport(requested_draws=requested_draws,
                        period_log2=period.log2_period, rules=tuple(rules))


# ---------------------------------------------------------------------------
# replication seed derivation

# 32-bit avalanche finalizer (the murmur-style constant pair).  It is a
# bijection on 32-bit words, which is what makes the derivation below
# provably collision-free rather than just statistically unlikely to
# collide.
def _avalanche32(x: int) -> int:
    x &= _MASK32
    x ^= x >> 16
    x = (x * 0x85EBCA6B) & _MASK32
    x ^= x >> 13
    x = (x * 0xC2B2AE35) & _MASK32
    x ^= x >> 16
    return x


SEED_DERIVATION_ID = "avalanche32-cyclewalk-v1"


def derive_replication_seed(kind: GeneratorKind, base_seed: int, index: int) -> int:
    """Seed for replication ``index`` from a base seed, collision-free.

    The base seed keys a 32-bit bijection (avalanche finalizer of the
    index xored with the key).  For seed domains smaller than all of
    32-bit space the value walks the bijection's cycle until it lands in
    the domain; because the walk is over a permutation restricted to a
    starting point already in the domain, distinct indices can never
    collide, for any number of replications the domain can hold.
    """
    if index < 0:
        raise DomainError(f"replication index must be nonnegative, got {index}")
    key = _avalanche32((base_seed & _MASK32) ^ 0x9E3779B9)
    if kind is GeneratorKind.MT19937:
        return _avalanche32(index ^ key)
    if kind is GeneratorKind.RANDU:
        if index >= 1 << 30:
            raise DomainError("RANDU has only 2**30 valid seeds")
        x = _avalanche32((2 * index + 1) ^ key)
        while x % 2 == 0 or x >= 1 << 31:
            x = _avalanche32(x ^ key)
        return x
    if index >= (1 << 31) - 2:
        raise DomainError("MINSTD has only 2**31 - 2 valid seeds")
    x = _avalanche32((index + 1) ^ key)
    while not 1 <= x <= (1 << 31) - 2:
        x = _avalanche32(x ^ key)
    return x


# ---------------------------------------------------------------------------
# output digest

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def digest_outputs(values: Sequence[float]) -> int:
    """Order-sensitive digest of replication outputs.

    Each value is rendered at 17 significant digits (which round-trips
    float64) followed by a newline, and the concatenation is FNV-1a
    hashed.  Identical outputs in identical order give identical
    digests on every platform.
    """
    blob = "".join(f"{float(v):.17g}\n" for v in values).encode("ascii")
    return fnv1a64(blob)


# ---------------------------------------------------------------------------
# manifest

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ReproducibilityManifest:
    """Plain-text record sufficient to regenerate a run bit for bit."""

    generator: GeneratorKind
    base_seed: int
    seed_derivation: str
    derived_seeds: tuple[int, ...]
    conversion: str
    replications: int
    draws_per_replication: int
    draws_consumed: tuple[int, ...]
    model: str
    model_params: tuple[tuple[str, str], ...]
    result_digest: int
    manifest_version: int = MANIFEST_VERSION
    tool_version: str = __version__

    def to_text(self) -> str:
        params = ";".join(f"{k}={v}" for k, v in self.model_params)
        lines = [
            f"manifest_version: {self.manifest_version}",
            f"tool_version: {self.tool_version}",
            f"generator: {self.generator.value}",
            f"base_seed: {self.base_seed}",
            f"seed_derivation: {self.seed_derivation}",
            f"derived_seeds: {','.join(str(s) for s in self.derived_seeds)}",
            f"conversion: {self.conversion}",
            f"replications: {self.replications}",
            f"draws_per_replication: {self.draws_per_replication}",
            f"draws_consumed: {','.join(str(d) for d in self.draws_consumed)}",
            f"model: {self.model}",
            f"model_params: {params}",
            f"result_digest: 0x{self.result_digest:016x}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ReproducibilityManifest":
        fields: dict[str, str] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            if not sep:
                raise DomainError(f"malformed manifest line: {line!r}")
            fields[key.strip()] = value.strip()
        try:
            version = int(fields["manifest_version"])
            if version != MANIFEST_VERSION:
                raise DomainError(f"unsupported manifest version {version}")
            params = tuple(
                tuple(item.split("=", 1))
                for item in fields["model_params"].split(";") if item)
            return cls(
                generator=GeneratorKind(fields["generator"]),
                base_seed=int(fields["base_seed"]),
                seed_derivation=fields["seed_derivation"],
                derived_seeds=tuple(int(s) for s in
                                    fields["derived_seeds"].split(",") if s),
                conversion=fields["conversion"],
                replications=int(fields["replications"]),
                draws_per_replication=int(fields["draws_per_replication"]),
                draws_consumed=tuple(int(d) for d in
                                     fields["draws_consumed"].split(",") if d),
                model=fields["model"],
                model_params=params,
                result_digest=int(fields["result_digest"], 16),
                manifest_version=version,
                tool_version=fields["tool_version"],
            )
        except KeyError as missing:
            raise DomainError(f"manifest missing field {missing}") from None


# ---------------------------------------------------------------------------
# models

ModelFn = Callable[[GeneratorState], float]
ModelFactory = Callable[[int, Mapping[str, str]], ModelFn]

_CHUNK = 1 << 17


def _pi_model(draws_per_replication: int, params: Mapping[str, str]) -> ModelFn:
    """Circle-quadrant area estimator.

    Consecutive draws pair into (x, y) points; the estimate is four
    times the fraction landing inside the unit quarter circle.  Each
    point costs two draws, so a replication of D draws yields D//2
    points.
    """
    points = draws_per_replication // 2
    if points == 0:
        raise DomainError("pi model needs at least 2 draws per replication")

    def run(state: GeneratorState) -> float:
        inside = 0
        remaining = points
        while remaining:
            k = min(_CHUNK, remaining)
            xy = state.real_block(2 * k).reshape(k, 2)
            inside += int(np.count_nonzero(xy[:, 0] ** 2 + xy[:, 1] ** 2 <= 1.0))
            remaining -= k
        return 4.0 * inside / points

    return run


def _uniform_mean_model(draws_per_replication: int,
                        params: Mapping[str, str]) -> ModelFn:
    """Mean of the raw uniform stream; the simplest possible model."""
    if draws_per_replication < 1:
        raise DomainError("uniform-mean model needs at least 1 draw")

    def run(state: GeneratorState) -> float:
        partial = []
        remaining = draws_per_replication
        while remaining:
            k = min(_CHUNK, remaining)
            partial.append(math.fsum(state.real_block(k).tolist()))
            remaining -= k
        return math.fsum(partial) / draws_per_replication

    return run


MODEL_REGISTRY: dict[str, ModelFactory] = {
    "pi": _pi_model,
    "uniform-mean": _uniform_mean_model,
}


# ---------------------------------------------------------------------------
# simulation runner

@dataclass(frozen=True)
class SimulationConfig:
    kind: GeneratorKind
    base_seed: int
    replications: int
    draws_per_replication: int
    model: str
    model_params: Mapping[str, str] = field(default_factory=dict)
    budget_policy: BudgetPolicy = BudgetPolicy.ENFORCE

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise DomainError(
                f"need at least 1 replication, got {self.replications}")
        if self.draws_per_replication < 1:
            raise DomainError(
                f"need at least 1 draw per replication, "
                f"got {self.draws_per_replication}")


def run_simulation(config: SimulationConfig,
                   model: Optional[ModelFn] = None
                   ) -> tuple[SummaryStats, ReproducibilityManifest, list[float]]:
    """Run all replications of a model and return stats, manifest, outputs.

    The total draw budget (replications times draws per replication) is
    checked before any generation: under ENFORCE a failing budget raises
    BudgetExceeded, under WARN it logs and proceeds.  Each replication
    runs on a fresh generator seeded by ``derive_replication_seed``.
    ``model`` defaults to the registry entry named by the config.
    """
    if model is None:
        try:
            factory = MODEL_REGISTRY[config.model]
        except KeyError:
            raise DomainError(f"unknown model {config.model!r}") from None
        model = factory(config.draws_per_replication, config.model_params)

    total = config.replications * config.draws_per_replication
    budget = budget_check(period_of(config.kind), total)
    if not budget.all_pass:
        msg = (f"{total} total draws break budget rule(s) "
               f"{', '.join(budget.failures())} for {config.kind.value}")
        if config.budget_policy is BudgetPolicy.ENFORCE:
            raise BudgetExceeded(msg)
        _log.warning("%s (continuing under WARN policy)", msg)

    outputs: list[float] = []
    derived: list[int] = []
    consumed: list[int] = []
    for i in range(config.replications):
        seed = derive_replication_seed(config.kind, config.base_seed, i)
        state = new_generator(config.kind, seed)
        outputs.append(float(model(state)))
        derived.append(seed)
        consumed.append(state.draws)

    stats = summarize(outputs)
    manifest = ReproducibilityManifest(
        generator=config.kind,
        base_seed=config.base_seed,
        seed_derivation=SEED_DERIVATION_ID,
        derived_seeds=tuple(derived),
        conversion=default_conversion(config.kind).value,
        replications=config.replications,
        draws_per_replication=config.draws_per_replication,
        draws_consumed=tuple(consumed),
        model=config.model,
        model_params=tuple(sorted((str(k), str(v))
                                  for k, v in config.model_params.items())),
        result_digest=digest_outputs(outputs),
    )
    return stats, manifest, outputs


def rerun_from_manifest(manifest: ReproducibilityManifest
                        ) -> tuple[SummaryStats, ReproducibilityManifest, list[float]]:
    """Re-execute a run recorded in a manifest.

    Rebuilds the configuration, reruns, and returns the fresh results;
    the caller compares the fresh digest against the recorded one.  The
    budget is not re-enforced: the original run already made that call.
    """
    config = SimulationConfig(
        kind=manifest.generator,
        base_seed=manifest.base_seed,
        replications=manifest.replications,
        draws_per_replication=manifest.draws_per_replication,
        model=manifest.model,
        model_params=dict(manifest.model_params),
        budget_policy=BudgetPolicy.WARN,
    )
    if manifest.seed_derivation != SEED_DERIVATION_ID:
        raise DomainError(
            f"manifest uses unknown seed derivation "
            f"{manifest.seed_derivation!r}")
    return run_simulation(config)
