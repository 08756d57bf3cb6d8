import json

import pytest

from helpers import all_cases, build, deviations, worst_deviation
from wikimeta import fixtures
from wikimeta.fixtures import oracle

TOL = 1e-10


def test_manifest_lists_every_file():
    on_disk = {p.name for p in fixtures.DATA.glob("*.csv")}
    assert {e["file"] for e in fixtures.manifest().values()} == on_disk
    assert {p.stem for p in fixtures.EXPECTED.glob("*.json")} == set(fixtures.names())


@pytest.mark.parametrize("name", fixtures.names())
def test_frozen_files_match_oracle(name):
    # the committed expected/*.json must be exactly what the oracle produces today
    committed = json.loads((fixtures.EXPECTED / f"{name}.json").read_text())
    assert committed["results"] == json.loads(json.dumps(oracle.oracle_compute(name)))


@pytest.mark.parametrize("name,measure", all_cases())
def test_pipeline_matches_oracle(name, measure):
    worst = max(deviations(fixtures.load(name).expected[measure], build(name, measure)),
                key=lambda item: item[1])
    assert worst[1] <= TOL, worst


def test_oracle_check_cli(capsys):
    assert oracle.main(["--check"]) == 0


def test_known_values():
    assert worst_deviation("hetero-2", "estimates") <= TOL
    h2 = fixtures.load("hetero-2").expected["estimates"]
    assert h2["Q"] == pytest.approx(5.0)
    assert h2["tau2"] == pytest.approx(0.4)
    assert h2["I2"] == pytest.approx(80.0)
    assert h2["random"]["se"] == pytest.approx(0.5)
    basic = fixtures.load("smd-basic").expected
    assert basic["smd_cohen"]["studies"][0]["variance"] == pytest.approx(0.225)
    assert basic["smd_hedges"]["studies"][0]["effect"] == pytest.approx(1 - 3 / 71)
