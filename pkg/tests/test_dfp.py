import math

import pytest

from changerisk.correlation import CorrelatedArtifactSet
from changerisk.dfp import (FAULT_CLASSES, HIGHLY_FAULT_PRONE,
                            POSSIBLY_FAULT_PRONE, SAFE, ThresholdBand,
                            classify_request, classify_value, compute_report,
                            dfp_of_artifact, dfp_of_set, effective_dfp,
                            threshold_band)
from changerisk.errors import ConfigError, DataError
from changerisk.taxonomy import ArtifactKind

K1 = ArtifactKind("bug_fix", "corrective", "source_code")
K2 = ArtifactKind("bug_fix", "corrective", "coupling")
K3 = ArtifactKind("bug_fix", "perfective", "structure")
K4 = ArtifactKind("feature_request", "functional", "dependency")


def _set(kinds):
    return CorrelatedArtifactSet(medoid=kinds[0], members=tuple(kinds))


def test_fault_classes_ordering():
    assert FAULT_CLASSES == (SAFE, POSSIBLY_FAULT_PRONE, HIGHLY_FAULT_PRONE)


@pytest.mark.parametrize("supports,total,expected", [
    ({K1: 1.0, K2: 0.6}, 4, 0.6),
    ({K1: 0.0}, 3, 1.0),
    ({K1: 0.25, K2: 0.25, K3: 0.5}, 5, 0.8),
    ({K1: 1.0, K2: 1.0}, 2, 0.0),
])
def test_dfp_of_set_values(supports, total, expected):
    s = _set(list(supports))
    assert dfp_of_set(s, supports, total) == pytest.approx(expected, abs=1e-12)


def test_dfp_of_set_requires_scores_for_all_members():
    s = _set([K1, K2])
    with pytest.raises(DataError):
        dfp_of_set(s, {K1: 0.5}, 4)


def test_dfp_of_set_rejects_empty_universe():
    with pytest.raises(DataError):
        dfp_of_set(_set([K1]), {K1: 0.5}, 0)


def test_dfp_of_artifact_values():
    sets = [_set([K1, K2]), _set([K3])]
    assert dfp_of_artifact(K1, sets, [0.6, 0.9]) == pytest.approx(0.7)
    assert dfp_of_artifact(K3, [_set([K3])], [1.0]) == 0.0
    assert dfp_of_artifact(K2, sets, [0.0, 0.9]) == 1.0


def test_dfp_of_artifact_sums_over_every_owning_set():
    sets = [_set([K1, K2]), _set([K1, K3])]
    assert dfp_of_artifact(K1, sets, [0.5, 0.3]) == pytest.approx(0.6)


def test_dfp_of_artifact_rejects_orphans_and_mismatch():
    sets = [_set([K1])]
    with pytest.raises(DataError):
        dfp_of_artifact(K2, sets, [0.5])
    with pytest.raises(DataError):
        dfp_of_artifact(K1, sets, [0.5, 0.5])


def test_threshold_band_collapses_on_constant_scores():
    band = threshold_band([0.5, 0.5, 0.5])
    assert band.dfpt == 0.5
    assert band.sdv == 0.0
    assert band.lower == band.upper == 0.5


def test_threshold_band_two_point_values():
    band = threshold_band([0.2, 0.6])
    assert band.dfpt == pytest.approx(0.4)
    assert band.sdv == pytest.approx(0.282842712474619, abs=1e-15)
    assert band.lower == pytest.approx(0.11715728752538102, abs=1e-15)
    assert band.upper == pytest.approx(0.682842712474619, abs=1e-15)


def test_threshold_band_is_centered():
    band = threshold_band([0.1, 0.35, 0.5, 0.82])
    assert band.lower == band.dfpt - band.sdv
    assert band.upper == band.dfpt + band.sdv
    assert (band.upper - band.dfpt) == pytest.approx(band.dfpt - band.lower,
                                                     abs=1e-12)


def test_threshold_band_translation_shifts_everything():
    base = threshold_band([0.1, 0.3, 0.2])
    moved = threshold_band([0.4, 0.6, 0.5])
    assert moved.dfpt == pytest.approx(base.dfpt + 0.3)
    assert moved.sdv == pytest.approx(base.sdv)
    assert moved.lower == pytest.approx(base.lower + 0.3)
    assert moved.upper == pytest.approx(base.upper + 0.3)


def test_threshold_band_needs_two_scores():
    with pytest.raises(DataError):
        threshold_band([0.5])
    with pytest.raises(DataError):
        threshold_band([])


def test_threshold_band_round_trips_as_dict():
    band = threshold_band([0.2, 0.6, 0.4])
    assert ThresholdBand.from_dict(band.to_dict()) == band


def test_classify_value_band_edges_resolve_upward():
    band = ThresholdBand(dfpt=0.4, sdv=0.1, lower=0.3, upper=0.5)
    assert classify_value(0.29, band) == SAFE
    assert classify_value(0.3, band) == POSSIBLY_FAULT_PRONE
    assert classify_value(0.42, band) == POSSIBLY_FAULT_PRONE
    assert classify_value(0.5, band) == HIGHLY_FAULT_PRONE
    assert classify_value(0.95, band) == HIGHLY_FAULT_PRONE


def test_classify_value_against_published_band():
    band = ThresholdBand(dfpt=0.394412607, sdv=0.062645,
                         lower=0.318610008, upper=0.443901512)
    assert classify_value(0.30, band) == SAFE
    assert classify_value(0.40, band) == POSSIBLY_FAULT_PRONE
    assert classify_value(0.45, band) == HIGHLY_FAULT_PRONE


def test_effective_dfp_rules():
    assert effective_dfp([0.2, 0.8, 0.5]) == 0.8
    assert effective_dfp([0.2, 0.8, 0.5], rule="mean") == pytest.approx(0.5)
    assert effective_dfp([0.4]) == 0.4


def test_effective_dfp_rejects_unknown_rule_and_empty_input():
    with pytest.raises(ConfigError):
        effective_dfp([0.5], rule="median")
    with pytest.raises(DataError):
        effective_dfp([])


def test_classify_request_combines_then_classifies():
    band = ThresholdBand(dfpt=0.5, sdv=0.1, lower=0.4, upper=0.6)
    dfps = {K1: 0.7, K2: 0.2}
    assert classify_request([K1, K2], dfps, band) == (0.7, HIGHLY_FAULT_PRONE)
    value, cls = classify_request([K1, K2], dfps, band, rule="mean")
    assert value == pytest.approx(0.45)
    assert cls == POSSIBLY_FAULT_PRONE


def test_classify_request_rejects_missing_inputs():
    band = ThresholdBand(dfpt=0.5, sdv=0.1, lower=0.4, upper=0.6)
    with pytest.raises(DataError):
        classify_request([], {K1: 0.5}, band)
    with pytest.raises(DataError):
        classify_request([K2], {K1: 0.5}, band)


def _report_fixture():
    sets = [_set([K1, K2]), _set([K3, K4])]
    scores = {K1: 1.0, K2: 1.0, K3: 0.0, K4: 0.0}
    assignments = {"CR-B": [K3, K4], "CR-A": [K1]}
    return compute_report(sets, scores, assignments)


def test_compute_report_cascades_exact_values():
    report = _report_fixture()
    assert report.set_dfps == (0.5, 1.0)
    assert report.artifact_dfps == {K1: 0.75, K2: 0.75, K3: 0.5, K4: 0.5}
    assert report.band.dfpt == pytest.approx(0.625)
    assert report.band.sdv == pytest.approx(math.sqrt(0.0625 / 3))
    value_a, class_a = report.classifications["CR-A"]
    assert value_a == 0.75
    assert class_a == POSSIBLY_FAULT_PRONE
    value_b, _ = report.classifications["CR-B"]
    assert value_b == 0.5


def test_report_dict_sections_are_sorted():
    d = _report_fixture().to_dict()
    assert set(d) == {"sets", "artifacts", "band", "classifications"}
    medoids = [s["medoid"] for s in d["sets"]]
    assert medoids == sorted(medoids)
    kinds = [a["kind"] for a in d["artifacts"]]
    assert kinds == sorted(kinds)
    assert [c["id"] for c in d["classifications"]] == ["CR-A", "CR-B"]
    assert d["band"]["dfpt"] == pytest.approx(0.625)
    assert d["artifacts"][0]["rs"] in (0.0, 1.0)


def test_classifications_csv_layout():
    csv_text = _report_fixture().classifications_csv()
    lines = csv_text.splitlines()
    assert lines[0] == "request_id,dfp,class"
    assert lines[1] == "CR-A,0.75,possibly_fault_prone"
    assert len(lines) == 3
    assert csv_text.endswith("\n")
