"""Inverse-variance pooling: fixed effect, DerSimonian-Laird random effects
and heterogeneity statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import effects
from .distributions import chi2_sf, two_sided_p
from .effects import EffectMeasure
from .errors import EmptyInput, InvalidParameter, MetaError, MissingRequiredColumns, MixedMeasures
from .ingest import parse_table

Z_95 = 1.959964

MEASURE_ALIASES = {
    "smd": "smd",
    "log_odds_ratio": "log_odds_ratio",
    "lor": "log_odds_ratio",
    "or": "log_odds_ratio",
    "log_variance_ratio": "log_variance_ratio",
    "lvr": "log_variance_ratio",
    "vr": "log_variance_ratio",
    "smd_cohen": "smd_cohen",
    "smd_hedges": "smd_hedges",
}


@dataclass(frozen=True)
class AnalysisConfig:
    measure: str = "smd"
    smd_variant: str = "hedges"

    def __post_init__(self):
        if self.measure not in MEASURE_ALIASES:
            raise InvalidParameter(f"unknown measure {self.measure!r}", measure=self.measure)
        if self.smd_variant not in ("cohen", "hedges"):
            raise InvalidParameter(f"unknown SMD variant {self.smd_variant!r}",
                                   variant=self.smd_variant)

    @property
    def effect_measure(self):
        name = MEASURE_ALIASES[self.measure]
        if name == "smd":
            name = f"smd_{self.smd_variant}"
        return EffectMeasure(name)


@dataclass(frozen=True)
class Heterogeneity:
    Q: float
    df: int
    tau2: float
    I2: float
    p_Q: float


@dataclass(frozen=True)
class PooledResult:
    model: str  # "fixed" | "random_dl"
    effect: float
    se: float
    ci_low: float
    ci_high: float
    z: float
    p: float
    k: int
    n_total: int


@dataclass(frozen=True)
class MetaAnalysisResult:
    table: object
    estimates: list
    fixed: PooledResult
    random: PooledResult
    heterogeneity: Heterogeneity
    measure: EffectMeasure
    title: str | None = None
    pubmed_ids: list = field(default_factory=list)

    def weights(self, model="random_dl"):
        """Percentage weight of each study under ``model``."""
        tau2 = self.heterogeneity.tau2 if model == "random_dl" else 0.0
        return weight_shares(self.estimates, tau2)


def _check(estimates):
    if not estimates:
        raise EmptyInput("no effect estimates to pool")
    measures = {e.measure for e in estimates}
    if len(measures) > 1:
        raise MixedMeasures("estimates use different effect measures: "
                            + ", ".join(sorted(m.value for m in measures)))


def _pool(estimates, tau2, model):
    weights = [1.0 / (e.variance + tau2) for e in estimates]
    total = math.fsum(weights)
    effect = math.fsum(w * e.effect for w, e in zip(weights, estimates)) / total
    se = math.sqrt(1.0 / total)
    z = effect / se
    return PooledResult(
        model=model,
        effect=effect,
        se=se,
        ci_low=effect - Z_95 * se,
        ci_high=effect + Z_95 * se,
        z=z,
        p=two_sided_p(z),
        k=len(estimates),
        n_total=sum(e.n_total for e in estimates),
    )


def weight_shares(estimates, tau2=0.0):
    weights = [1.0 / (e.variance + tau2) for e in estimates]
    total = math.fsum(weights)
    return [100.0 * w / total for w in weights]


def pool_fixed(estimates):
    _check(estimates)
    return _pool(estimates, 0.0, "fixed")


def heterogeneity(estimates, fixed_effect):
    """Cochran's Q, its chi-square p-value, the DL moment estimate of tau2 and I2."""
    if not estimates:
        raise EmptyInput("no effect estimates")
    k = len(estimates)
    weights = [1.0 / e.variance for e in estimates]
    q = math.fsum(w * (e.effect - fixed_effect) ** 2 for w, e in zip(weights, estimates))
    df = k - 1
    if k < 2:
        return Heterogeneity(Q=0.0, df=0, tau2=0.0, I2=0.0, p_Q=1.0)
    sum_w = math.fsum(weights)
    c = sum_w - math.fsum(w * w for w in weights) / sum_w
    tau2 = max(0.0, (q - df) / c)
    i2 = max(0.0, (q - df) / q) * 100.0 if q > 0 else 0.0
    return Heterogeneity(Q=q, df=df, tau2=tau2, I2=i2, p_Q=chi2_sf(q, df))


def pool_random_dl(estimates, het=None):
    _check(estimates)
    if het is None:
        het = heterogeneity(estimates, pool_fixed(estimates).effect)
    return _pool(estimates, het.tau2, "random_dl")


def meta_analyze(table, config=None, pubmed_ids=None):
    """Run effect estimation and both pooling models over a study table."""
    config = config or AnalysisConfig()
    measure = config.effect_measure
    missing = table.column_map.missing(measure.kind)
    if missing:
        raise MissingRequiredColumns(missing)
    estimates = []
    for record in table.records:
        try:
            estimates.append(effects.estimate(record, measure))
        except MetaError as exc:
            exc.detail.setdefault("label", record.label)
            raise
    fixed = pool_fixed(estimates)
    het = heterogeneity(estimates, fixed.effect)
    random = pool_random_dl(estimates, het)
    return MetaAnalysisResult(table=table, estimates=estimates, fixed=fixed, random=random,
                              heterogeneity=het, measure=measure, title=table.title,
                              pubmed_ids=list(pubmed_ids or []))


def analyze_text(raw_text, config=None, overrides=None, title=None, source_uri=None,
                 pubmed_ids=None):
    """Parse CSV text and meta-analyze it in one call."""
    config = config or AnalysisConfig()
    table = parse_table(raw_text, overrides=overrides, require=config.effect_measure.kind,
                        source_uri=source_uri, title=title)
    return meta_analyze(table, config, pubmed_ids=pubmed_ids)
