"""Shared comparison helpers for the fixture and acceptance tests."""

import math
import os
from pathlib import Path

from wikimeta import fixtures
from wikimeta.effects import EffectMeasure
from wikimeta.pooling import AnalysisConfig, analyze_text, heterogeneity, pool_fixed, pool_random_dl

GOLDEN = Path(__file__).parent / "golden"

_CONFIGS = {
    "smd_hedges": AnalysisConfig("smd", "hedges"),
    "smd_cohen": AnalysisConfig("smd", "cohen"),
    "log_odds_ratio": AnalysisConfig("log_odds_ratio"),
    "log_variance_ratio": AnalysisConfig("log_variance_ratio"),
}


def rel_err(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def build(name, measure):
    """Run the main pipeline and flatten it to the oracle's result layout."""
    fx = fixtures.load(name)
    if fx.kind == "estimates":
        es = fixtures.load_estimates(name)
        fixed = pool_fixed(es)
        het = heterogeneity(es, fixed.effect)
        random_ = pool_random_dl(es, het)
    else:
        result = analyze_text(fx.csv_text, _CONFIGS[measure])
        es, fixed, random_, het = result.estimates, result.fixed, result.random, result.heterogeneity
    return {
        "studies": [{"label": e.study_label, "effect": e.effect, "variance": e.variance} for e in es],
        "fixed": {"effect": fixed.effect, "se": fixed.se, "p": fixed.p},
        "random": {"effect": random_.effect, "se": random_.se, "p": random_.p},
        "Q": het.Q, "df": het.df, "tau2": het.tau2, "I2": het.I2,
    }


def deviations(expected, actual, path=""):
    """Yield (path, relative error) for every numeric leaf of ``expected``."""
    if isinstance(expected, dict):
        assert set(expected) <= set(actual), path
        for key, value in expected.items():
            yield from deviations(value, actual[key], f"{path}/{key}")
    elif isinstance(expected, list):
        assert len(expected) == len(actual), path
        for i, (e, a) in enumerate(zip(expected, actual)):
            yield from deviations(e, a, f"{path}[{i}]")
    elif isinstance(expected, (int, float)) and not isinstance(expected, bool):
        # values below 1e-12 are compared absolutely (e.g. tau2 of an exactly homogeneous set)
        if abs(expected) < 1e-12 and abs(actual) < 1e-12:
            yield path, 0.0
        else:
            yield path, rel_err(expected, actual)
    else:
        assert expected == actual, path


def worst_deviation(name, measure):
    expected = fixtures.load(name).expected[measure]
    return max((d for _, d in deviations(expected, build(name, measure))), default=0.0)


def all_cases():
    return [(name, m) for name in fixtures.names() for m in fixtures.load(name).measures]


def check_golden(name, data):
    """Compare bytes against tests/golden/<name>; UPDATE_GOLDENS=1 rewrites the file."""
    path = GOLDEN / name
    if isinstance(data, str):
        data = data.encode("utf-8")
    if os.environ.get("UPDATE_GOLDENS") == "1" or not path.exists():
        if not os.environ.get("UPDATE_GOLDENS") and not path.exists():
            raise AssertionError(f"missing golden {path}; run with UPDATE_GOLDENS=1")
        path.write_bytes(data)
    return path.read_bytes() == data


def finite(x):
    return isinstance(x, float) and math.isfinite(x)
