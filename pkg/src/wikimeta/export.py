"""Serialization of meta-analysis results to JSON, CSV and an R script.

Numbers are rounded to 12 significant digits; key and column order is fixed
so that the output is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
from enum import Enum

from .effects import EffectMeasure
from .errors import UnsupportedMeasure
from .pooling import AnalysisConfig


class ExportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    R_SCRIPT = "r_script"


def sig12(value):
    """Round a float to 12 significant digits (ints pass through)."""
    if isinstance(value, int):
        return value
    return float(f"{value:.12g}")


def fmt12(value):
    return f"{value:.12g}"


def _pooled(p):
    return {"effect": sig12(p.effect), "se": sig12(p.se), "ci_low": sig12(p.ci_low),
            "ci_high": sig12(p.ci_high), "z": sig12(p.z), "p": sig12(p.p)}


def to_dict(result):
    het = result.heterogeneity
    random = _pooled(result.random)
    random["tau2"] = sig12(het.tau2)
    return {
        "measure": result.measure.value,
        "title": result.title,
        "studies": [{"label": e.study_label, "effect": sig12(e.effect),
                     "variance": sig12(e.variance), "n_total": e.n_total}
                    for e in result.estimates],
        "fixed": _pooled(result.fixed),
        "random": random,
        "heterogeneity": {"Q": sig12(het.Q), "df": het.df, "I2": sig12(het.I2),
                          "p_Q": sig12(het.p_Q)},
    }


def to_json(result):
    return json.dumps(to_dict(result), indent=2, ensure_ascii=False) + "\n"


CSV_HEADER = ["label", "effect", "variance", "weight_fixed_pct", "weight_random_pct"]


def to_csv(result):
    """Per-study effects and weights followed by FIXED and RANDOM summary lines.

    Summary lines carry the pooled effect and its variance (se squared).
    """
    out = io.StringIO()
    writer = csv.writer(out, delimiter=",", quotechar='"', lineterminator="\n",
                        quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CSV_HEADER)
    rows = zip(result.estimates, result.weights("fixed"), result.weights("random_dl"))
    for est, w_fixed, w_random in rows:
        writer.writerow([est.study_label, fmt12(est.effect), fmt12(est.variance),
                         fmt12(w_fixed), fmt12(w_random)])
    writer.writerow(["FIXED", fmt12(result.fixed.effect), fmt12(result.fixed.se ** 2), "100", ""])
    writer.writerow(["RANDOM", fmt12(result.random.effect), fmt12(result.random.se ** 2), "", "100"])
    return out.getvalue()


def _r_string(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _r_vector(name, values):
    return f"{name} <- c({', '.join(values)})"


def _r_num(value):
    return repr(float(value)) if not float(value).is_integer() else str(int(value))


def to_r_script(table, config=None):
    """R source that loads the table into vectors and runs the ``meta`` package."""
    config = config or AnalysisConfig()
    measure = config.effect_measure
    if measure is EffectMeasure.LOG_VARIANCE_RATIO:
        raise UnsupportedMeasure("the meta package has no log variance ratio entry point",
                                 measure=measure.value)
    records = table.records
    lines = [
        f"# Meta-analysis of {table.title or 'study table'}",
        "# Generated by wikimeta; requires the R package 'meta'.",
        "library(meta)",
        "",
        _r_vector("labels", [_r_string(r.label) for r in records]),
    ]
    if measure is EffectMeasure.LOG_ODDS_RATIO:
        counts = [r.counts for r in records]
        lines += [
            _r_vector("e1", [str(c.events1) for c in counts]),
            _r_vector("t1", [str(c.total1) for c in counts]),
            _r_vector("e2", [str(c.events2) for c in counts]),
            _r_vector("t2", [str(c.total2) for c in counts]),
            "",
            "m <- metabin(e1, t1, e2, t2, studlab = labels, sm = \"OR\", method = \"Inverse\",",
            "             method.tau = \"DL\", incr = 0.5, allincr = FALSE)",
        ]
    else:
        g1 = [r.group1 for r in records]
        g2 = [r.group2 for r in records]
        method = "Cohen" if measure is EffectMeasure.SMD_COHEN else "Hedges"
        lines += [
            _r_vector("n1", [str(g.n) for g in g1]),
            _r_vector("m1", [_r_num(g.mean) for g in g1]),
            _r_vector("sd1", [_r_num(g.sd) for g in g1]),
            _r_vector("n2", [str(g.n) for g in g2]),
            _r_vector("m2", [_r_num(g.mean) for g in g2]),
            _r_vector("sd2", [_r_num(g.sd) for g in g2]),
            "",
            f"m <- metacont(n1, m1, sd1, n2, m2, sd2, studlab = labels, sm = \"SMD\",",
            f"              method.smd = \"{method}\", method.tau = \"DL\")",
        ]
    lines += ["print(summary(m))", "forest(m)", ""]
    return "\n".join(lines)


def export(result, fmt, config=None):
    fmt = ExportFormat(fmt)
    if fmt is ExportFormat.JSON:
        return to_json(result)
    if fmt is ExportFormat.CSV:
        return to_csv(result)
    return to_r_script(result.table, config)
