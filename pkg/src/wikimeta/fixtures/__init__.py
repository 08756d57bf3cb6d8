"""Bundled synthetic datasets and their frozen oracle results."""

from __future__ import annotations

import json
from dataclasses import dataclass

from pathlib import Path

DATA = Path(__file__).parent / "data"
EXPECTED = Path(__file__).parent / "expected"

__all__ = ["FixtureSet", "load", "names", "oracle_compute"]


@dataclass(frozen=True)
class FixtureSet:
    name: str
    kind: str          # "studies" or "estimates"
    csv_text: str
    measures: tuple
    expected: dict     # measure -> frozen oracle results
    notes: str = ""

    @property
    def path(self):
        return DATA / manifest()[self.name]["file"]


def manifest():
    return json.loads((DATA / "manifest.json").read_text(encoding="utf-8"))


def oracle_compute(name):
    from .oracle import oracle_compute as compute

    return compute(name)


def names():
    return list(manifest())


def load(name):
    entry = manifest()[name]
    expected = json.loads((EXPECTED / f"{name}.json").read_text(encoding="utf-8"))["results"]
    return FixtureSet(
        name=name,
        kind=entry["kind"],
        csv_text=(DATA / entry["file"]).read_text(encoding="utf-8"),
        measures=tuple(entry.get("measures", ["estimates"])),
        expected=expected,
        notes=entry.get("notes", ""),
    )


def load_estimates(name):
    """Effect estimates of an estimate-level fixture (label, effect, variance, n_total)."""
    from ..effects import EffectEstimate, EffectMeasure
    from ..ingest import read_table

    raw = read_table(load(name).csv_text)
    cols = {h: i for i, h in enumerate(raw.header)}
    return [EffectEstimate(row[cols["label"]], float(row[cols["effect"]]),
                           float(row[cols["variance"]]), EffectMeasure.SMD_HEDGES,
                           int(row[cols["n_total"]]))
            for row in raw.rows]
