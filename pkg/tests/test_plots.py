import random
import xml.etree.ElementTree as ET

import pytest

from helpers import check_golden
from wikimeta import fixtures
from wikimeta.errors import EmptyInput
from wikimeta.plots import MassPoint, dot_radius, forest_svg, funnel_svg, labbe_mass_svg, nice_ticks
from wikimeta.pooling import analyze_text

NS = "{http://www.w3.org/2000/svg}"


def analysis(name, title=None):
    return analyze_text(fixtures.load(name).csv_text, title=title or f"{name}.csv")


def parse(doc):
    return ET.fromstring(doc.encode())


def by_class(root, tag, cls):
    return [el for el in root.iter(NS + tag) if cls in el.get("class", "").split()]


def mass_points(n=50, seed=7):
    rnd = random.Random(seed)
    return [MassPoint(f"set-{i:02d}", rnd.uniform(-1.5, 1.5), rnd.uniform(0.05, 0.8),
                      rnd.randint(10, 600)) for i in range(n)]


class TestForest:
    @pytest.mark.parametrize("name", ["two-study", "ref-3", "random-6", "smd-basic"])
    def test_marker_counts(self, name):
        result = analysis(name)
        root = parse(forest_svg(result))
        k = len(result.estimates)
        assert len(by_class(root, "rect", "study-marker")) == k
        assert len(by_class(root, "line", "ci")) == k
        assert len(by_class(root, "polygon", "diamond")) == 2
        assert len(by_class(root, "line", "zero-line")) == 1
        assert len(by_class(root, "text", "heterogeneity")) == 1
        assert root.get("width") == "800"

    def test_x_mapping_is_affine(self):
        result = analysis("random-6")
        root = parse(forest_svg(result))
        centres = [float(r.get("x")) + float(r.get("width")) / 2
                   for r in by_class(root, "rect", "study-marker")]
        effects = [e.effect for e in result.estimates]
        slope = (centres[1] - centres[0]) / (effects[1] - effects[0])
        for x, y in zip(centres, effects):
            assert x == pytest.approx(centres[0] + slope * (y - effects[0]), abs=0.02)
        assert slope > 0

    def test_single_study_extents_match(self):
        result = analysis("smd-basic")
        root = parse(forest_svg(result))
        (ci,) = by_class(root, "line", "ci")
        for diamond in by_class(root, "polygon", "diamond"):
            xs = [float(p.split(",")[0]) for p in diamond.get("points").split()]
            assert min(xs) == pytest.approx(float(ci.get("x1")), abs=0.011)
            assert max(xs) == pytest.approx(float(ci.get("x2")), abs=0.011)

    def test_long_labels_are_truncated(self):
        text = ("study,patients n,patients mean,patients sd,controls n,controls mean,controls sd\n"
                f"{'L' * 60},10,1,1,10,0,1\nShort & <sweet>,12,1,1,12,0,1\n")
        root = parse(forest_svg(analyze_text(text, title="labels")))
        labels = [t.text for t in root.iter(NS + "text") if t.text and t.text.startswith(("L", "Short"))]
        assert "L" * 39 + "…" in labels
        assert "Short & <sweet>" in labels
        assert all(len(t) <= 40 for t in labels)

    def test_deterministic(self):
        assert forest_svg(analysis("ref-3")).encode() == forest_svg(analysis("ref-3")).encode()

    def test_golden(self):
        assert check_golden("two-study.forest.svg", forest_svg(analysis("two-study")).encode())


class TestFunnel:
    def test_points_and_bounds(self):
        result = analysis("random-6")
        root = parse(funnel_svg(result))
        points = by_class(root, "circle", "study-point")
        assert len(points) == len(result.estimates)
        assert len(by_class(root, "line", "funnel-bound")) == 2
        assert len(by_class(root, "line", "pooled-line")) == 1
        # se axis inverted: larger se sits lower on the page
        pairs = sorted(zip((e.se for e in result.estimates), (float(p.get("cy")) for p in points)))
        assert [cy for _, cy in pairs] == sorted(cy for _, cy in pairs)

    def test_goldens(self):
        assert check_golden("two-study.funnel.svg", funnel_svg(analysis("two-study")).encode())
        assert check_golden("random-6.funnel.svg", funnel_svg(analysis("random-6")).encode())


class TestMass:
    def test_counts_and_classes(self):
        points = mass_points()
        root = parse(labbe_mass_svg(points))
        dots = by_class(root, "circle", "mass-point")
        assert len(dots) == 50
        n_sig = sum(p.significant for p in points)
        assert len(by_class(root, "circle", "significant")) == n_sig
        assert len(by_class(root, "circle", "nonsignificant")) == 50 - n_sig
        assert 0 < n_sig < 50
        assert len(by_class(root, "line", "significance-bound")) == 2

    def test_significance_rule(self):
        assert MassPoint("x", 1.0, 0.4, 10).significant
        assert not MassPoint("x", 0.5, 0.4, 10).significant
        assert MassPoint("x", -1.0, 0.4, 10).significant

    def test_radius(self):
        assert dot_radius(1) == 3.0
        assert dot_radius(100) == 10.0
        assert dot_radius(10_000) == 20.0

    def test_order_independent(self):
        points = mass_points()
        shuffled = list(points)
        random.Random(1).shuffle(shuffled)
        assert labbe_mass_svg(points).encode() == labbe_mass_svg(shuffled).encode()

    def test_empty(self):
        with pytest.raises(EmptyInput):
            labbe_mass_svg([])

    def test_golden(self):
        assert check_golden("mass-50.svg", labbe_mass_svg(mass_points()).encode())


def test_nice_ticks():
    ticks, digits = nice_ticks(-0.37, 1.21)
    assert digits == 1
    assert ticks[0] >= -0.37 and ticks[-1] <= 1.21
    steps = {round(b - a, 9) for a, b in zip(ticks, ticks[1:])}
    assert len(steps) == 1
    assert 2 <= len(ticks) <= 10
