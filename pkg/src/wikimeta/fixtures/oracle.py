"""Straight-line reference evaluation of the fixture datasets.

Shares no code with the rest of the package on purpose: every formula is
written out again here, loops are plain, and CSV columns are read by their
literal fixture header names.  Outputs are frozen into ``expected/*.json``;
``python -m wikimeta.fixtures.oracle --check`` reports drift and
``--write`` rewrites the files (only ever done deliberately).
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

HERE = Path(__file__).parent
DATA = HERE / "data"
EXPECTED = HERE / "expected"


def _rows(csv_text):
    return list(csv.DictReader(io.StringIO(csv_text)))


def study_effects(csv_text, measure):
    out = []
    for row in _rows(csv_text):
        label = row["study"]
        if measure == "log_odds_ratio":
            a = float(row["patients events"])
            b = float(row["patients total"]) - a
            c = float(row["controls events"])
            d = float(row["controls total"]) - c
            if a == 0 or b == 0 or c == 0 or d == 0:
                a += 0.5
                b += 0.5
                c += 0.5
                d += 0.5
            y = math.log((a * d) / (b * c))
            v = 1 / a + 1 / b + 1 / c + 1 / d
            out.append((label, y, v))
            continue
        n1 = float(row["patients n"])
        m1 = float(row["patients mean"])
        s1 = float(row["patients sd"])
        n2 = float(row["controls n"])
        m2 = float(row["controls mean"])
        s2 = float(row["controls sd"])
        if measure == "log_variance_ratio":
            y = math.log(s1) - math.log(s2)
            v = 0.5 / (n1 - 1) + 0.5 / (n2 - 1)
        else:
            sp = math.sqrt(((n1 - 1) * s1 * s1 + (n2 - 1) * s2 * s2) / (n1 + n2 - 2))
            d_ = (m1 - m2) / sp
            v = 1 / n1 + 1 / n2 + d_ * d_ / (2 * (n1 + n2))
            y = d_
            if measure == "smd_hedges":
                j = 1 - 3 / (4 * (n1 + n2) - 9)
                y = j * d_
                v = j * j * v
        out.append((label, y, v))
    return out


def estimate_rows(csv_text):
    return [(r["label"], float(r["effect"]), float(r["variance"])) for r in _rows(csv_text)]


def pool(studies):
    k = len(studies)
    sw = 0.0
    swy = 0.0
    sww = 0.0
    for _, y, v in studies:
        sw += 1 / v
        swy += y / v
        sww += 1 / (v * v)
    fixed = swy / sw
    fixed_se = (1 / sw) ** 0.5
    q = 0.0
    if k > 1:
        for _, y, v in studies:
            q += (y - fixed) ** 2 / v
    if k > 1:
        tau2 = (q - (k - 1)) / (sw - sww / sw)
        if tau2 < 0:
            tau2 = 0.0
    else:
        tau2 = 0.0
    if q > 0:
        i2 = 100 * (q - (k - 1)) / q
        if i2 < 0:
            i2 = 0.0
    else:
        i2 = 0.0
    rsw = 0.0
    rswy = 0.0
    for _, y, v in studies:
        rsw += 1 / (v + tau2)
        rswy += y / (v + tau2)
    random = rswy / rsw
    random_se = (1 / rsw) ** 0.5
    return {
        "studies": [{"label": s[0], "effect": s[1], "variance": s[2]} for s in studies],
        "fixed": {"effect": fixed, "se": fixed_se,
                  "p": math.erfc(abs(fixed / fixed_se) / math.sqrt(2))},
        "random": {"effect": random, "se": random_se,
                   "p": math.erfc(abs(random / random_se) / math.sqrt(2))},
        "Q": q,
        "df": k - 1,
        "tau2": tau2,
        "I2": i2,
    }


def manifest():
    return json.loads((DATA / "manifest.json").read_text(encoding="utf-8"))


def oracle_compute(name):
    """Expected results of fixture ``name``, keyed by measure."""
    entry = manifest()[name]
    text = (DATA / entry["file"]).read_text(encoding="utf-8")
    if entry["kind"] == "estimates":
        return {"estimates": pool(estimate_rows(text))}
    return {m: pool(study_effects(text, m)) for m in entry["measures"]}


def render(name):
    body = {
        "fixture": name,
        "provenance": "wikimeta.fixtures.oracle: straight-line evaluation, independent of "
                      "wikimeta.pooling and wikimeta.effects",
        "results": oracle_compute(name),
    }
    return json.dumps(body, indent=2) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--check", action="store_true", help="compare against committed files")
    group.add_argument("--write", action="store_true", help="rewrite committed files")
    args = parser.parse_args(argv)
    status = 0
    for name in manifest():
        path = EXPECTED / f"{name}.json"
        text = render(name)
        if args.write:
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path}")
        elif not path.exists() or path.read_text(encoding="utf-8") != text:
            print(f"drift: {name}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
