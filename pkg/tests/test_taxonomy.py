import pytest

from changerisk.errors import ConfigError, DataError
from changerisk.ingest import ChangeRequest
from changerisk.taxonomy import (DEFAULT_RULES, ArtifactKind,
                                 build_artifacts, classify, default_rules,
                                 enumerate_kinds, load_rules,
                                 parse_rules_lines, rules_to_lines)
from changerisk.textprep import descriptive_tokens


def _classified(short, long_="", kind_hint=None, rules=DEFAULT_RULES):
    cr = ChangeRequest(id="CR-1", short_desc=short, long_desc=long_,
                       kind_hint=kind_hint)
    return classify(cr, descriptive_tokens(cr), rules)


def test_enumerate_kinds_count():
    kinds = enumerate_kinds()
    assert len(kinds) == 35
    assert len(set(kinds)) == 35


def test_enumerate_kinds_membership():
    kinds = set(enumerate_kinds())
    assert ArtifactKind("bug_fix", "corrective", "dependency") in kinds
    assert all(k.level2 != "adaptive" for k in kinds
               if k.level1 == "feature_request")


def test_artifact_kind_validates_levels():
    with pytest.raises(ConfigError):
        ArtifactKind("enhancement", "corrective", "source_code")
    with pytest.raises(ConfigError):
        ArtifactKind("feature_request", "adaptive", "source_code")
    with pytest.raises(ConfigError):
        ArtifactKind("bug_fix", "corrective", "tests")


def test_artifact_kind_label_round_trip():
    for kind in enumerate_kinds():
        assert ArtifactKind.from_label(kind.label) == kind


def test_artifact_kind_from_bad_label():
    with pytest.raises(ConfigError):
        ArtifactKind.from_label("bug_fix.corrective")


def test_classify_refactor_keywords():
    kinds = _classified("Refactor renaming of helpers")
    assert ArtifactKind("feature_request", "refactor", "source_code") in kinds


def test_classify_empty_tokens_falls_back():
    kinds = _classified("the and of")
    assert kinds == [ArtifactKind("bug_fix", "corrective", "source_code")]


def test_classify_category_and_aspect_combine():
    kinds = _classified("crash in inherited widget subclass")
    assert kinds == [ArtifactKind("bug_fix", "corrective", "inheritance")]


def test_classify_multiple_aspects_share_category():
    kinds = _classified("fix coupling between imported modules")
    assert ArtifactKind("bug_fix", "corrective", "coupling") in kinds
    assert ArtifactKind("bug_fix", "corrective", "dependency") in kinds
    assert ArtifactKind("bug_fix", "corrective", "structure") in kinds
    assert len({k.level2 for k in kinds}) == 1


def test_classify_rule_order_settles_category():
    # "fix" (corrective) appears before "slow" (perfective) in the defaults
    kinds = _classified("fix slow rendering")
    assert all(k.level2 == "corrective" for k in kinds)


def test_classify_kind_hint_constrains_motivation():
    # "add" alone maps to functional; a bug hint forces the bug_fix side
    unhinted = _classified("add bounds check")
    hinted = _classified("add bounds check", kind_hint="bug")
    assert all(k.level1 == "feature_request" for k in unhinted)
    assert all(k.level1 == "bug_fix" for k in hinted)


def test_classify_kind_hint_default_category():
    kinds = _classified("mysterious report", kind_hint="feature")
    assert kinds == [ArtifactKind("feature_request", "functional",
                                  "source_code")]


def test_classify_deterministic():
    assert _classified("fix modules coupling") == _classified(
        "fix modules coupling")


def test_every_request_gets_a_kind():
    for text in ("", "zzz qqq", "fix", "renamed interface"):
        cr = ChangeRequest(id="CR-1", short_desc=text or "placeholder",
                           long_desc="")
        assert classify(cr, descriptive_tokens(cr), DEFAULT_RULES)


def test_parse_rules_lines_basic():
    rules = parse_rules_lines([
        "# comment",
        "bug_fix.corrective.*: fix, crash",
        "bug_fix.perfective.*: slow",
        "bug_fix.adaptive.*: port",
        "bug_fix.preventive.*: guard",
        "feature_request.refactor.*: refactor",
        "feature_request.functional.*: add",
        "feature_request.architectural.*: redesign",
        "*.*.inheritance: inherit",
        "*.*.coupling: coupl",
        "*.*.dependency: depend",
        "*.*.structure: modul",
    ])
    assert len(rules.category_rules) == 7
    assert len(rules.aspect_rules) == 4


def test_parse_rules_infers_level1_from_unique_level2():
    rules = parse_rules_lines([
        "*.corrective.*: fix",
        "bug_fix.perfective.*: slow",
        "bug_fix.adaptive.*: port",
        "bug_fix.preventive.*: guard",
        "feature_request.refactor.*: refactor",
        "feature_request.functional.*: add",
        "feature_request.architectural.*: redesign",
        "*.*.inheritance: inherit",
        "*.*.coupling: coupl",
        "*.*.dependency: depend",
        "*.*.structure: modul",
    ])
    fired = [r for r in rules.category_rules if "fix" in r.patterns]
    assert fired[0].level1 == "bug_fix"


def test_parse_rules_stems_patterns():
    rules = parse_rules_lines([
        "bug_fix.corrective.*: fixes, crashing",
        "bug_fix.perfective.*: slow",
        "bug_fix.adaptive.*: port",
        "bug_fix.preventive.*: guard",
        "feature_request.refactor.*: refactor",
        "feature_request.functional.*: add",
        "feature_request.architectural.*: redesign",
        "*.*.inheritance: inherit",
        "*.*.coupling: coupl",
        "*.*.dependency: depend",
        "*.*.structure: modul",
    ])
    corrective = rules.category_rules[0]
    assert corrective.patterns == frozenset({"fix", "crash"})


def test_parse_rules_rejects_all_wildcards():
    with pytest.raises(ConfigError, match="selects nothing"):
        parse_rules_lines(["*.*.*: fix"])


def test_parse_rules_rejects_level1_only():
    with pytest.raises(ConfigError, match="level2"):
        parse_rules_lines(["bug_fix.*.*: fix"])


def test_parse_rules_rejects_unknown_names():
    with pytest.raises(ConfigError, match="unknown level2"):
        parse_rules_lines(["*.cosmetic.*: paint"])
    with pytest.raises(ConfigError, match="unknown level3"):
        parse_rules_lines(["*.*.testing: test"])


def test_parse_rules_requires_reachability():
    with pytest.raises(ConfigError, match="bug_fix.perfective"):
        parse_rules_lines(["bug_fix.corrective.*: fix",
                           "*.*.inheritance: inherit"])


def test_parse_rules_bad_selector_shape():
    with pytest.raises(ConfigError, match="3 dot-separated"):
        parse_rules_lines(["corrective: fix"])
    with pytest.raises(ConfigError, match="missing ':'"):
        parse_rules_lines(["bug_fix.corrective.* fix"])


def test_rules_round_trip_through_lines():
    lines = rules_to_lines(DEFAULT_RULES)
    again = parse_rules_lines(lines)
    assert again == DEFAULT_RULES


def test_load_rules_file(tmp_path):
    path = tmp_path / "rules.txt"
    path.write_text("\n".join(rules_to_lines(DEFAULT_RULES)) + "\n")
    assert load_rules(path) == DEFAULT_RULES


def test_default_rules_valid_under_porter():
    rules = default_rules("porter")
    cr = ChangeRequest(id="CR-1", short_desc="fixes the crashing parser",
                       long_desc="")
    kinds = classify(cr, descriptive_tokens(cr, stemmer="porter"), rules)
    assert all(k.level2 == "corrective" for k in kinds)


def test_build_artifacts_empty():
    assert build_artifacts([], {}) == []


def test_build_artifacts_groups_members():
    kind = ArtifactKind("bug_fix", "corrective", "source_code")
    crs = [ChangeRequest(id="CR-2", short_desc="x", long_desc=""),
           ChangeRequest(id="CR-1", short_desc="y", long_desc="")]
    artifacts = build_artifacts(crs, {"CR-1": [kind], "CR-2": [kind]})
    assert len(artifacts) == 1
    assert artifacts[0].members == ("CR-1", "CR-2")


def test_build_artifacts_one_request_two_kinds():
    k1 = ArtifactKind("bug_fix", "corrective", "source_code")
    k2 = ArtifactKind("bug_fix", "corrective", "coupling")
    crs = [ChangeRequest(id="CR-1", short_desc="x", long_desc="")]
    artifacts = build_artifacts(crs, {"CR-1": [k1, k2]})
    assert len(artifacts) == 2
    assert all(a.members == ("CR-1",) for a in artifacts)


def test_build_artifacts_rejects_unassigned_request():
    crs = [ChangeRequest(id="CR-1", short_desc="x", long_desc="")]
    with pytest.raises(DataError, match="CR-1"):
        build_artifacts(crs, {})


def test_build_artifacts_union_covers_input(small_requests):
    assignments = {cr.id: classify(cr, descriptive_tokens(cr), DEFAULT_RULES)
                   for cr in small_requests}
    artifacts = build_artifacts(small_requests, assignments)
    covered = {m for a in artifacts for m in a.members}
    assert covered == {cr.id for cr in small_requests}
