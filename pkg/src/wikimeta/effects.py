"""Per-study effect sizes and their sampling variances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import AllZeroArm, InsufficientSubjects


class EffectMeasure(str, Enum):
    SMD_COHEN = "smd_cohen"
    SMD_HEDGES = "smd_hedges"
    LOG_ODDS_RATIO = "log_odds_ratio"
    LOG_VARIANCE_RATIO = "log_variance_ratio"

    @property
    def kind(self):
        """Which table columns the measure needs: ``continuous`` or ``binary``."""
        return "binary" if self is EffectMeasure.LOG_ODDS_RATIO else "continuous"


@dataclass(frozen=True)
class EffectEstimate:
    study_label: str
    effect: float
    variance: float
    measure: EffectMeasure
    n_total: int

    @property
    def se(self):
        return math.sqrt(self.variance)


def hedges_correction(df):
    """Small-sample factor J = 1 - 3 / (4 df - 1) for ``df = n1 + n2 - 2``."""
    return 1.0 - 3.0 / (4.0 * df - 1.0)


def smd(g1, g2, variant="hedges", label=""):
    """Standardized mean difference of group 1 over group 2.

    Cohen's d uses the pooled standard deviation; Hedges' g multiplies d by
    the small-sample factor J and its variance by J**2.
    """
    if variant not in ("cohen", "hedges"):
        raise ValueError(f"unknown SMD variant {variant!r}")
    n1, n2 = g1.n, g2.n
    if variant == "hedges" and n1 + n2 < 5:
        raise InsufficientSubjects(f"Hedges' g needs at least 5 subjects, {label or 'study'} has {n1 + n2}",
                                   label=label, n_total=n1 + n2)
    pooled_sd = math.sqrt(((n1 - 1) * g1.sd ** 2 + (n2 - 1) * g2.sd ** 2) / (n1 + n2 - 2))
    d = (g1.mean - g2.mean) / pooled_sd
    var_d = (n1 + n2) / (n1 * n2) + d * d / (2.0 * (n1 + n2))
    if variant == "cohen":
        return EffectEstimate(label, d, var_d, EffectMeasure.SMD_COHEN, n1 + n2)
    j = hedges_correction(n1 + n2 - 2)
    return EffectEstimate(label, j * d, j * j * var_d, EffectMeasure.SMD_HEDGES, n1 + n2)


def log_odds_ratio(counts, label=""):
    """Log odds ratio of arm 1 versus arm 2 with a 0.5 continuity correction.

    The correction is added to all four cells only when one of them is zero.
    """
    if counts.total1 < 1 or counts.total2 < 1:
        raise AllZeroArm(f"{label or 'study'} has an arm without subjects", label=label)
    a = counts.events1
    b = counts.total1 - counts.events1
    c = counts.events2
    d = counts.total2 - counts.events2
    if 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    effect = math.log(a * d / (b * c))
    variance = 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d
    return EffectEstimate(label, effect, variance, EffectMeasure.LOG_ODDS_RATIO,
                          counts.total1 + counts.total2)


def log_variance_ratio(g1, g2, label=""):
    # ln(sd1/sd2), i.e. half the log ratio of the variances
    effect = math.log(g1.sd / g2.sd)
    variance = 1.0 / (2.0 * (g1.n - 1)) + 1.0 / (2.0 * (g2.n - 1))
    return EffectEstimate(label, effect, variance, EffectMeasure.LOG_VARIANCE_RATIO, g1.n + g2.n)


def estimate(record, measure):
    """Effect estimate of one :class:`~wikimeta.ingest.StudyRecord`."""
    measure = EffectMeasure(measure)
    if measure is EffectMeasure.LOG_ODDS_RATIO:
        return log_odds_ratio(record.counts, label=record.label)
    if measure is EffectMeasure.LOG_VARIANCE_RATIO:
        return log_variance_ratio(record.group1, record.group2, label=record.label)
    variant = "cohen" if measure is EffectMeasure.SMD_COHEN else "hedges"
    return smd(record.group1, record.group2, variant=variant, label=record.label)
