"""Weighted bipartite graph between code blocks and artifacts, with
hub-authority scoring.

Code blocks act as hubs (matrix rows), artifacts as authorities (columns).
Edge weights grow with revision count and saturate below 1.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .ingest import RevisionEvent
from .taxonomy import ArtifactKind, ChangeRequestArtifact

HITS_MODES = ("converged", "single_pass")

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITER = 1000

# largest per-side size for which a dense weight matrix is materialized
DENSE_LIMIT = 10_000


def edge_weight(r: int) -> float:
    """Weight of an edge with revision count ``r``: 1 - 1/r, in [0, 1)."""
    if r < 1:
        raise DataError(f"edge weight needs a revision count >= 1, got {r}",
                        stage="graph")
    return 1.0 - 1.0 / r


@dataclass
class BipartiteGraph:
    """Immutable-by-convention graph; do not mutate after build_graph."""

    code_blocks: tuple[str, ...]
    artifacts: tuple[ArtifactKind, ...]
    revision_counts: dict[tuple[ArtifactKind, str], int]

    @property
    def num_edges(self) -> int:
        return len(self.revision_counts)

    def edges(self) -> Iterator[tuple[ArtifactKind, str, int, float]]:
        """Yield (artifact, block, revision count, weight) sorted for dumps."""
        for (kind, block), r in sorted(self.revision_counts.items(),
                                       key=lambda kv: (kv[0][0], kv[0][1])):
            yield kind, block, r, edge_weight(r)

    def to_jsonl(self) -> bytes:
        lines = [json.dumps({"artifact": kind.label, "block": block,
                             "r": r, "ew": ew})
                 for kind, block, r, ew in self.edges()]
        return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


@dataclass
class HitsState:
    hub_weights: np.ndarray
    authority_weights: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class ArtifactScore:
    kind: ArtifactKind
    rs: float


def build_graph(events: Sequence[RevisionEvent],
                artifacts: Sequence[ChangeRequestArtifact]) -> BipartiteGraph:
    """Count, per (artifact, block), the revision events whose linked
    requests belong to the artifact.  An event adds at most 1 to any single
    edge even when several of its linked requests share the artifact.
    """
    kinds = tuple(sorted(a.kind for a in artifacts))
    if len(set(kinds)) != len(kinds):
        raise DataError("duplicate artifact kinds", stage="graph")
    owners: dict[str, list[ArtifactKind]] = {}
    for artifact in artifacts:
        for member in artifact.members:
            owners.setdefault(member, []).append(artifact.kind)

    counts: Counter[tuple[ArtifactKind, str]] = Counter()
    for ev in events:
        touched = {kind for cid in ev.linked_cr_ids
                   for kind in owners.get(cid, ())}
        for kind in touched:
            counts[(kind, ev.code_block_id)] += 1

    blocks = tuple(sorted({block for (_, block) in counts}))
    return BipartiteGraph(code_blocks=blocks, artifacts=kinds,
                          revision_counts=dict(counts))


def _weight_products(g: BipartiteGraph) -> tuple[Callable, Callable]:
    """Return (authority update, hub update) matrix-vector products."""
    m, n = len(g.code_blocks), len(g.artifacts)
    block_index = {b: i for i, b in enumerate(g.code_blocks)}
    artifact_index = {a: j for j, a in enumerate(g.artifacts)}
    if m <= DENSE_LIMIT and n <= DENSE_LIMIT:
        weights = np.zeros((m, n))
        for (kind, block), r in g.revision_counts.items():
            weights[block_index[block], artifact_index[kind]] = edge_weight(r)
        return (lambda hw: weights.T @ hw), (lambda aw: weights @ aw)

    rows = np.empty(g.num_edges, dtype=np.intp)
    cols = np.empty(g.num_edges, dtype=np.intp)
    vals = np.empty(g.num_edges)
    for pos, ((kind, block), r) in enumerate(sorted(g.revision_counts.items(),
                                                    key=lambda kv: (kv[0][1],
                                                                    kv[0][0]))):
        rows[pos] = block_index[block]
        cols[pos] = artifact_index[kind]
        vals[pos] = edge_weight(r)

    def to_authorities(hw: np.ndarray) -> np.ndarray:
        return np.bincount(cols, weights=vals * hw[rows], minlength=n)

    def to_hubs(aw: np.ndarray) -> np.ndarray:
        return np.bincount(rows, weights=vals * aw[cols], minlength=m)

    return to_authorities, to_hubs


def _normalized(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DataError("hub-authority iteration collapsed to zero",
                        stage="graph")
    return v / norm


def run_hits(g: BipartiteGraph, mode: str = "converged",
             tolerance: float = DEFAULT_TOLERANCE,
             max_iter: int = DEFAULT_MAX_ITER,
             initial_hub: Sequence[float] | None = None) -> HitsState:
    """Compute hub weights (code blocks) and authority weights (artifacts).

    ``converged`` alternates authority and hub updates with L2 normalization
    of both vectors until the max-abs change drops to ``tolerance`` or
    ``max_iter`` rounds pass.  ``single_pass`` performs exactly one authority
    update and one hub update with no normalization.

    A graph whose every edge has weight 0 (all revision counts equal 1)
    carries no gradient for the iteration; converged mode then returns the
    normalized initial hub vector unchanged, with zero iterations.
    """
    if mode not in HITS_MODES:
        raise ConfigError(f"unknown hub-authority mode {mode!r}")
    if tolerance <= 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
    if g.num_edges == 0:
        raise DataError("no edges in bipartite graph", stage="graph")

    m, n = len(g.code_blocks), len(g.artifacts)
    if initial_hub is None:
        hub = np.ones(m)
    else:
        hub = np.asarray(initial_hub, dtype=float)
        if hub.shape != (m,):
            raise DataError(f"initial hub vector must have length {m}",
                            stage="graph")
        if np.any(hub < 0) or not np.any(hub > 0):
            raise DataError("initial hub vector must be non-negative and "
                            "not all zero", stage="graph")
    to_authorities, to_hubs = _weight_products(g)

    if mode == "single_pass":
        authority = to_authorities(hub)
        new_hub = to_hubs(authority)
        residual = float(np.max(np.abs(new_hub - hub)))
        return HitsState(hub_weights=new_hub, authority_weights=authority,
                         iterations=1, residual=residual)

    if all(r == 1 for r in g.revision_counts.values()):
        return HitsState(hub_weights=hub / float(np.linalg.norm(hub)),
                         authority_weights=np.zeros(n),
                         iterations=0, residual=0.0)

    hub = hub / float(np.linalg.norm(hub))
    authority = np.zeros(n)
    iterations = 0
    residual = math.inf
    while iterations < max_iter:
        new_authority = _normalized(to_authorities(hub))
        new_hub = _normalized(to_hubs(new_authority))
        residual = float(max(np.max(np.abs(new_hub - hub)),
                             np.max(np.abs(new_authority - authority))))
        hub, authority = new_hub, new_authority
        iterations += 1
        if residual <= tolerance:
            break
    return HitsState(hub_weights=hub, authority_weights=authority,
                     iterations=iterations, residual=residual)


def revision_support(g: BipartiteGraph, h: HitsState) -> list[ArtifactScore]:
    """Fraction of total hub weight carried by each artifact's blocks.

    An artifact is supported by every block it has an edge to, including
    weight-0 edges (revision count 1).
    """
    total = float(h.hub_weights.sum())
    if total <= 0:
        raise DataError("degenerate hub vector", stage="graph")
    block_index = {b: i for i, b in enumerate(g.code_blocks)}
    sums: dict[ArtifactKind, float] = {kind: 0.0 for kind in g.artifacts}
    for (kind, block) in g.revision_counts:
        sums[kind] += float(h.hub_weights[block_index[block]])
    return [ArtifactScore(kind=kind, rs=sums[kind] / total)
            for kind in g.artifacts]
