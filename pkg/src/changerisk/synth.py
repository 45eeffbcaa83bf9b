"""Deterministic synthetic corpora with planted fault-prone artifact kinds.

Request descriptions carry keywords chosen so the default taxonomy rules
recover the intended kind exactly; blocks are partitioned into per-kind
pools; revision counts follow a geometric-style draw, multiplied for
planted kinds.  Everything is driven by one seeded RNG, so a fixed config
yields byte-identical files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Mapping

from .errors import ConfigError
from .ingest import (ChangeRequest, RevisionEvent, change_requests_to_jsonl,
                     revisions_to_jsonl)
from .taxonomy import ArtifactKind

# surface words whose stems hit exactly one default category rule
_CATEGORY_WORD = {
    ("bug_fix", "corrective"): "fixes",
    ("bug_fix", "perfective"): "slow",
    ("bug_fix", "adaptive"): "ported",
    ("bug_fix", "preventive"): "guard",
    ("feature_request", "refactor"): "refactoring",
    ("feature_request", "functional"): "support",
    ("feature_request", "architectural"): "redesigned",
}

# surface words whose stems hit exactly one default aspect rule
_ASPECT_WORD = {
    "inheritance": "subclass",
    "coupling": "coupling",
    "dependency": "imported",
    "structure": "modules",
    "source_code": None,
}

# neutral vocabulary that fires no rule and survives stop-word removal
_FILLER_WORDS = ("alpha", "beta", "gamma", "delta", "omega", "sigma",
                 "kernel", "widget", "parser", "lexer", "buffer", "cache",
                 "tensor", "vector", "matrix", "queue")

DEFAULT_KIND_WEIGHTS: Mapping[str, float] = {
    "bug_fix.corrective.source_code": 0.30,
    "bug_fix.corrective.coupling": 0.20,
    "feature_request.functional.source_code": 0.20,
    "bug_fix.perfective.structure": 0.15,
    "feature_request.refactor.dependency": 0.15,
}

_EPOCH = datetime(2014, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    num_requests: int = 100
    num_blocks: int = 400
    kind_weights: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_KIND_WEIGHTS))
    planted_kinds: tuple[str, ...] = ()
    planted_multiplier: int = 5
    blocks_per_request: tuple[int, int] = (1, 3)
    revision_rate: float = 0.5

    def validate(self) -> None:
        problems = []
        if self.num_requests < 0:
            problems.append("num_requests must be >= 0")
        if self.num_blocks < 1:
            problems.append("num_blocks must be >= 1")
        if not self.kind_weights:
            problems.append("kind_weights must name at least one kind")
        else:
            for label in self.kind_weights:
                try:
                    ArtifactKind.from_label(label)
                except ConfigError:
                    problems.append(f"unknown artifact kind {label!r}")
            if any(w <= 0 for w in self.kind_weights.values()):
                problems.append("kind weights must be positive")
            elif abs(sum(self.kind_weights.values()) - 1.0) > 1e-9:
                problems.append("kind weights must sum to 1")
        unknown_planted = [p for p in self.planted_kinds
                           if p not in self.kind_weights]
        if unknown_planted:
            problems.append("planted kinds missing from kind_weights: "
                            + ", ".join(unknown_planted))
        if self.planted_multiplier < 1:
            problems.append("planted_multiplier must be >= 1")
        low, high = self.blocks_per_request
        if not 1 <= low <= high:
            problems.append("blocks_per_request must satisfy 1 <= low <= high")
        if not 0.0 <= self.revision_rate < 1.0:
            problems.append("revision_rate must be in [0, 1)")
        if problems:
            raise ConfigError("invalid synth config: " + "; ".join(problems))


def _block_pools(cfg: SynthConfig) -> dict[str, list[str]]:
    """Partition block ids into per-kind pools, proportional to weight."""
    labels = sorted(cfg.kind_weights)
    raw = {lb: cfg.num_blocks * cfg.kind_weights[lb] for lb in labels}
    sizes = {lb: max(1, int(raw[lb])) for lb in labels}
    # hand out the remainder by largest fractional part, label order on ties
    remainder = cfg.num_blocks - sum(sizes.values())
    if remainder > 0:
        by_fraction = sorted(labels, key=lambda lb: (-(raw[lb] - int(raw[lb])), lb))
        for lb in (by_fraction * (remainder // len(labels) + 1))[:remainder]:
            sizes[lb] += 1
    high = cfg.blocks_per_request[1]
    short = [lb for lb in labels if sizes[lb] < high]
    if short:
        raise ConfigError(
            "invalid synth config: block pool smaller than blocks_per_request "
            "high for: " + ", ".join(short))
    pools: dict[str, list[str]] = {}
    next_block = 0
    for lb in labels:
        pools[lb] = [f"src/m{idx:05d}.c" for idx
                     in range(next_block, next_block + sizes[lb])]
        next_block += sizes[lb]
    return pools


def _geometric_extra(rng: random.Random, rate: float) -> int:
    extra = 0
    while rng.random() < rate:
        extra += 1
    return extra


def generate(cfg: SynthConfig) -> tuple[bytes, bytes, dict[str, bool]]:
    """Produce (change-request jsonl, revision jsonl, truth labels)."""
    cfg.validate()
    pools = _block_pools(cfg)
    labels = sorted(cfg.kind_weights)
    weights = [cfg.kind_weights[lb] for lb in labels]
    planted = set(cfg.planted_kinds)
    rng = random.Random(cfg.seed)

    requests: list[ChangeRequest] = []
    events: list[RevisionEvent] = []
    truth: dict[str, bool] = {}
    rev_counter = 0
    low, high = cfg.blocks_per_request

    for i in range(cfg.num_requests):
        label = rng.choices(labels, weights=weights, k=1)[0]
        kind = ArtifactKind.from_label(label)
        cr_id = f"CR-{i + 1}"
        keywords = [_CATEGORY_WORD[(kind.level1, kind.level2)]]
        aspect_word = _ASPECT_WORD[kind.level3]
        if aspect_word:
            keywords.append(aspect_word)
        fillers = rng.sample(_FILLER_WORDS, 4)
        fault = label in planted
        requests.append(ChangeRequest(
            id=cr_id,
            short_desc=" ".join(keywords + fillers[:1]),
            long_desc=" ".join(fillers[1:]),
            ground_truth=fault))
        truth[cr_id] = fault

        for block in rng.sample(pools[label], rng.randint(low, high)):
            count = 1 + _geometric_extra(rng, cfg.revision_rate)
            if fault:
                count *= cfg.planted_multiplier
            for _ in range(count):
                rev_counter += 1
                events.append(RevisionEvent(
                    revision_id=f"r{rev_counter:06d}",
                    code_block_id=block,
                    timestamp=_EPOCH + timedelta(minutes=rev_counter),
                    message=f"work on {cr_id}",
                    linked_cr_ids=(cr_id,)))

    return (change_requests_to_jsonl(requests), revisions_to_jsonl(events),
            truth)
