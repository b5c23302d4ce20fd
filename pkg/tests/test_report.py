import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tsprism.decompose import Decomposition
from tsprism.errors import EmptyInput
from tsprism.report import (
    CorrelationReport,
    GlobalReport,
    WaterfallReport,
    correlation_report,
    global_report,
    render_svg,
    waterfall,
)
from tsprism.series import Scaler
from tsprism.shapley import ShapExplanation

SVG_NS = "{http://www.w3.org/2000/svg}"


def _explanation(phi, base=0.0, input_id=None):
    return ShapExplanation(
        base_value=base,
        phi=dict(phi),
        model_output=base + math.fsum(phi.values()),
        input_id=input_id,
    )


def _decomposition(components):
    arrays = {k: np.asarray(v, dtype=float) for k, v in components.items()}
    total = sum(arrays.values())
    return Decomposition(components=arrays, original=total, coefficients=np.zeros(0), block_slices={})


class TestGlobalReport:
    def test_mean_absolute_phi(self):
        r = global_report([_explanation({"A": 1.0, "B": -1.0}), _explanation({"A": 3.0, "B": 1.0})])
        assert r.means == {"A": 2.0, "B": 1.0}
        assert r.count == 2

    def test_single_explanation(self):
        r = global_report([_explanation({"A": -0.5, "B": 2.0})])
        assert r.means == {"A": 0.5, "B": 2.0}

    def test_all_zero(self):
        r = global_report([_explanation({"A": 0.0}), _explanation({"A": 0.0})])
        assert r.means == {"A": 0.0}

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            global_report([])

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        explanations = [_explanation({"A": rng.normal(), "B": rng.normal()}) for _ in range(20)]
        shuffled = [explanations[i] for i in rng.permutation(20)]
        assert global_report(explanations).means == global_report(shuffled).means

    def test_scaler_converts_to_domain_units(self):
        r = global_report([_explanation({"A": 1.0, "B": -1.0})], scaler=Scaler(10.0, 2.0))
        assert r.means == {"A": 2.0, "B": 2.0}
        assert r.units == "domain"

    def test_ranked(self):
        r = GlobalReport(means={"A": 1.0, "B": 3.0, "C": 2.0}, count=1)
        assert r.ranked() == [("B", 3.0), ("C", 2.0), ("A", 1.0)]

    def test_negative_mean_rejected(self):
        with pytest.raises(ValueError):
            GlobalReport(means={"A": -1.0}, count=1)


class TestWaterfall:
    def test_affine_conversion_example(self):
        e = _explanation({"G": 1.0, "D": 0.0, "W": 0.0, "O": 0.0}, base=0.0)
        w = waterfall(e, Scaler(mean=10.0, std=2.0))
        assert w.base_value == 10.0
        assert w.steps[0] == ("G", 2.0)
        assert w.final_value == 12.0
        assert w.units == "domain"

    def test_all_zero_phi_final_equals_base(self):
        e = _explanation({"G": 0.0, "D": 0.0}, base=1.5)
        w = waterfall(e)
        assert w.final_value == w.base_value == 1.5

    def test_ordering_follows_concept_order(self):
        e = _explanation({"z": 1.0, "a": 2.0})
        assert [name for name, _ in waterfall(e).steps] == ["z", "a"]

    def test_round_trip_domain_units_50_random(self):
        rng = np.random.default_rng(4)
        scaler = Scaler(mean=5616.06, std=733.2)
        for _ in range(50):
            e = _explanation({k: rng.normal() for k in "GDWO"}, base=rng.normal())
            w = waterfall(e, scaler)
            direct = float(scaler.inverse(e.model_output))
            assert abs(w.base_value + math.fsum(v for _, v in w.steps) - direct) <= 1e-6

    def test_additivity_scaled_units(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            e = _explanation({k: rng.normal() for k in "GDWO"}, base=rng.normal())
            w = waterfall(e)
            assert abs(w.base_value + math.fsum(v for _, v in w.steps) - w.final_value) <= 1e-9

    def test_cumulative(self):
        w = WaterfallReport(base_value=1.0, steps=(("a", 2.0), ("b", -0.5)), final_value=2.5)
        assert w.cumulative() == [1.0, 3.0, 2.5]


class TestCorrelationReport:
    def test_persistence_affine_relation_gives_r_one(self):
        # phi = last component value minus a shared constant: exact correlation.
        rng = np.random.default_rng(6)
        lasts = rng.normal(size=30)
        decomps = [_decomposition({"A": [0.0, float(x)]}) for x in lasts]
        explanations = [_explanation({"A": float(x) - 1.25}) for x in lasts]
        r = correlation_report(explanations, decomps)
        assert r.r["A"] == pytest.approx(1.0, abs=1e-9)

    def test_anti_correlated_pairs(self):
        xs = np.linspace(-2, 2, 25)
        decomps = [_decomposition({"A": [0.0, float(x)]}) for x in xs]
        explanations = [_explanation({"A": -float(x)}) for x in xs]
        r = correlation_report(explanations, decomps)
        assert r.r["A"] == pytest.approx(-1.0, abs=1e-12)

    def test_constant_component_gives_null_r(self):
        decomps = [_decomposition({"A": [0.0, 3.0]}) for _ in range(10)]
        explanations = [_explanation({"A": float(i)}) for i in range(10)]
        assert correlation_report(explanations, decomps).r["A"] is None

    def test_pair_count_matches(self):
        decomps = [_decomposition({"A": [0.0, float(i)]}) for i in range(7)]
        explanations = [_explanation({"A": float(i) ** 2}) for i in range(7)]
        r = correlation_report(explanations, decomps)
        assert r.count == 7
        assert len(r.pairs["A"]) == 7

    def test_misaligned_lists_rejected(self):
        with pytest.raises(ValueError):
            correlation_report([_explanation({"A": 1.0})], [])

    def test_scaler_scales_pairs_not_r(self):
        xs = np.linspace(1, 5, 9)
        decomps = [_decomposition({"A": [0.0, float(x)]}) for x in xs]
        explanations = [_explanation({"A": 2.0 * float(x)}) for x in xs]
        plain = correlation_report(explanations, decomps)
        scaled = correlation_report(explanations, decomps, Scaler(0.0, 3.0))
        assert scaled.r == plain.r
        assert scaled.pairs["A"][0][0] == pytest.approx(3.0 * plain.pairs["A"][0][0])


class TestRenderSvg:
    def test_bar_geometry_two_to_one(self):
        svg = render_svg(GlobalReport(means={"A": 2.0, "B": 1.0}, count=1))
        root = ET.fromstring(svg)
        bars = [el for el in root.iter(f"{SVG_NS}rect") if el.get("class") == "bar"]
        assert len(bars) == 2
        widths = [float(b.get("width")) for b in bars]
        assert widths[0] == pytest.approx(2.0 * widths[1])

    def test_byte_identical_for_identical_input(self):
        report = GlobalReport(means={"A": 2.0, "B": 1.0}, count=3)
        assert render_svg(report, title="t") == render_svg(report, title="t")

    def test_empty_title_omits_title_element(self):
        report = GlobalReport(means={"A": 1.0}, count=1)
        root = ET.fromstring(render_svg(report, title=""))
        assert root.find(f"{SVG_NS}title") is None
        titled = ET.fromstring(render_svg(report, title="hello"))
        assert titled.find(f"{SVG_NS}title").text == "hello"

    def test_waterfall_renders_arrows(self):
        w = WaterfallReport(base_value=0.0, steps=(("G", 1.0), ("D", -0.5)), final_value=0.5)
        root = ET.fromstring(render_svg(w, title="w"))
        arrows = [el for el in root.iter(f"{SVG_NS}line") if el.get("class") == "arrow"]
        assert len(arrows) == 2

    def test_waterfall_zero_step_renders_point(self):
        w = WaterfallReport(base_value=0.0, steps=(("G", 0.0),), final_value=0.0)
        root = ET.fromstring(render_svg(w))
        assert len(list(root.iter(f"{SVG_NS}circle"))) == 1

    def test_correlation_scatter_grid(self):
        pairs = {
            "A": tuple((float(i), float(i)) for i in range(5)),
            "B": tuple((float(i), -float(i)) for i in range(5)),
        }
        report = CorrelationReport(pairs=pairs, r={"A": 1.0, "B": -1.0}, count=5)
        root = ET.fromstring(render_svg(report))
        assert len(list(root.iter(f"{SVG_NS}circle"))) == 10

    def test_null_r_labelled(self):
        report = CorrelationReport(pairs={"A": ((1.0, 2.0),)}, r={"A": None}, count=1)
        assert b"r: n/a" in render_svg(report)

    def test_title_escaped(self):
        report = GlobalReport(means={"A": 1.0}, count=1)
        svg = render_svg(report, title="<&>")
        assert b"&lt;&amp;&gt;" in svg
        ET.fromstring(svg)

    def test_unknown_report_type(self):
        with pytest.raises(TypeError):
            render_svg(object())
