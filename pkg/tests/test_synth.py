import collections
import io

import pytest

from changerisk.errors import ConfigError
from changerisk.ingest import parse_change_requests, parse_revision_log
from changerisk.synth import (DEFAULT_KIND_WEIGHTS, SynthConfig, generate)
from changerisk.taxonomy import build_artifacts, classify, default_rules
from changerisk.textprep import descriptive_tokens


def _kinds_of(request, rules):
    return classify(request, descriptive_tokens(request), rules)

PLANTED_CFG = SynthConfig(
    seed=11, num_requests=60, num_blocks=200,
    kind_weights={"bug_fix.corrective.source_code": 0.6,
                  "feature_request.functional.source_code": 0.4},
    planted_kinds=("bug_fix.corrective.source_code",),
    planted_multiplier=4)


def test_generate_is_byte_deterministic():
    first = generate(PLANTED_CFG)
    second = generate(PLANTED_CFG)
    assert first[0] == second[0]
    assert first[1] == second[1]
    assert first[2] == second[2]


def test_generate_seed_changes_output():
    import dataclasses
    other = dataclasses.replace(PLANTED_CFG, seed=12)
    assert generate(other)[0] != generate(PLANTED_CFG)[0]


def test_generated_corpus_parses_and_links():
    cr_bytes, rev_bytes, truth = generate(PLANTED_CFG)
    requests = parse_change_requests(io.BytesIO(cr_bytes))
    events = parse_revision_log(io.BytesIO(rev_bytes))
    assert len(requests) == 60
    assert {r.id for r in requests} == set(truth)
    linked = {rid for e in events for rid in e.linked_cr_ids}
    assert linked == set(truth)
    assert all(e.linked_cr_ids for e in events)


def test_descriptions_recover_the_sampled_kind():
    cr_bytes, _, truth = generate(PLANTED_CFG)
    requests = parse_change_requests(io.BytesIO(cr_bytes))
    rules = default_rules()
    planted_label = "bug_fix.corrective.source_code"
    for request in requests:
        kinds = _kinds_of(request, rules)
        labels = {k.label for k in kinds}
        assert len(labels) == 1
        if truth[request.id]:
            assert labels == {planted_label}
        else:
            assert labels == {"feature_request.functional.source_code"}


def test_truth_marks_exactly_planted_requests():
    _, _, truth = generate(PLANTED_CFG)
    assert set(truth.values()) == {True, False}
    unplanted = SynthConfig(seed=11, num_requests=10, num_blocks=50)
    assert set(generate(unplanted)[2].values()) == {False}


def test_block_pools_are_disjoint_across_kinds():
    cr_bytes, rev_bytes, truth = generate(PLANTED_CFG)
    requests = parse_change_requests(io.BytesIO(cr_bytes))
    events = parse_revision_log(io.BytesIO(rev_bytes))
    blocks_of = collections.defaultdict(set)
    for e in events:
        for rid in e.linked_cr_ids:
            blocks_of[truth[rid]].add(e.code_block_id)
    assert not (blocks_of[True] & blocks_of[False])


def test_planted_blocks_receive_more_revisions():
    _, rev_bytes, truth = generate(PLANTED_CFG)
    events = parse_revision_log(io.BytesIO(rev_bytes))
    counts = collections.Counter()
    planted_blocks = set()
    for e in events:
        counts[(e.code_block_id, e.linked_cr_ids)] += 1
        if truth[e.linked_cr_ids[0]]:
            planted_blocks.add(e.code_block_id)
    planted = [c for (block, _), c in counts.items() if block in planted_blocks]
    other = [c for (block, _), c in counts.items()
             if block not in planted_blocks]
    assert sum(planted) / len(planted) > 2 * sum(other) / len(other)


def test_zero_requests_yield_empty_files():
    cr_bytes, rev_bytes, truth = generate(
        SynthConfig(seed=0, num_requests=0, num_blocks=100))
    assert cr_bytes == b"" and rev_bytes == b""
    assert truth == {}


def test_default_weights_are_a_valid_config():
    SynthConfig().validate()
    assert sum(DEFAULT_KIND_WEIGHTS.values()) == pytest.approx(1.0)


def test_validate_collects_every_problem():
    bad = SynthConfig(num_requests=-1, num_blocks=0,
                      kind_weights={"bug_fix.corrective.source_code": 2.0},
                      planted_kinds=("nope.nope.nope",),
                      planted_multiplier=0, blocks_per_request=(3, 1),
                      revision_rate=1.0)
    with pytest.raises(ConfigError) as err:
        bad.validate()
    message = str(err.value)
    for fragment in ("num_requests", "num_blocks", "sum to 1",
                     "planted kinds", "planted_multiplier",
                     "blocks_per_request", "revision_rate"):
        assert fragment in message


def test_validate_rejects_unknown_kind_labels():
    with pytest.raises(ConfigError) as err:
        SynthConfig(kind_weights={"made.up.kind": 1.0}).validate()
    assert "unknown artifact kind" in str(err.value)


def test_generate_rejects_pools_too_small_for_request_span():
    cfg = SynthConfig(num_blocks=5, blocks_per_request=(1, 4),
                      kind_weights={"bug_fix.corrective.source_code": 0.5,
                                    "bug_fix.perfective.structure": 0.5})
    with pytest.raises(ConfigError) as err:
        generate(cfg)
    assert "block pool smaller" in str(err.value)


def test_generated_requests_map_to_single_artifact_each():
    cr_bytes, _, _ = generate(PLANTED_CFG)
    requests = parse_change_requests(io.BytesIO(cr_bytes))
    rules = default_rules()
    assignments = {r.id: _kinds_of(r, rules) for r in requests}
    artifacts = build_artifacts(requests, assignments)
    labels = {a.kind.label for a in artifacts}
    assert labels == {"bug_fix.corrective.source_code",
                      "feature_request.functional.source_code"}
