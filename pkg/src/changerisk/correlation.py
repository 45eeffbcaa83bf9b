"""Categorical correlation between artifacts and k-medoids grouping.

Two artifacts are compared through a contingency table over their member
requests: cell (i, j) counts the code blocks revised under both request i
and request j.  The mean-square contingency coefficient of that table is
the correlation; 1 minus it is the clustering dissimilarity.
"""

from __future__ import annotations

import io
import csv
import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, DegenerateTableError
from .ingest import RevisionEvent
from .taxonomy import ArtifactKind, ChangeRequestArtifact
from .validation import check_dissimilarity

logger = logging.getLogger(__name__)

CORRELATION_MODES = ("standard", "reciprocal")

MAX_MEDOID_ROUNDS = 100
PAM_RESTARTS = 5
PAM_EXHAUSTIVE_LIMIT = 60000


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class CorrelationMatrix:
    kinds: tuple[ArtifactKind, ...]
    values: np.ndarray


@dataclass(frozen=True)
class CorrelatedArtifactSet:
    medoid: object
    members: tuple


def blocks_by_request(events: Iterable[RevisionEvent]) -> dict[str, frozenset[str]]:
    """Co-occurrence basis: request id -> code blocks it revised."""
    acc: dict[str, set[str]] = {}
    for ev in events:
        for cid in ev.linked_cr_ids:
            acc.setdefault(cid, set()).add(ev.code_block_id)
    return {cid: frozenset(blocks) for cid, blocks in acc.items()}


def contingency_table(a: ChangeRequestArtifact, b: ChangeRequestArtifact,
                      universe: Mapping[str, frozenset[str]]) -> ContingencyTable:
    """Joint occurrence counts between the member requests of two artifacts."""
    if not a.members or not b.members:
        raise DataError("artifact with empty member set", stage="correlation")
    counts = np.zeros((len(a.members), len(b.members)), dtype=np.int64)
    row_blocks = [universe.get(rid, frozenset()) for rid in a.members]
    col_blocks = [universe.get(cid, frozenset()) for cid in b.members]
    for i, rb in enumerate(row_blocks):
        for j, cb in enumerate(col_blocks):
            counts[i, j] = len(rb & cb)
    return ContingencyTable(counts=counts, row_ids=tuple(a.members),
                            col_ids=tuple(b.members))


def chi_square(t: ContingencyTable, mode: str = "standard") -> float:
    """Mean-square contingency coefficient of a table, in [0, 1] when standard.

    Standard mode uses cell fractions of the grand total (the Cramer's-V-
    squared form); cells with a zero expected fraction contribute nothing.
    Reciprocal mode instead maps every count c to 1 - 1/c (0 for c = 0),
    without clamping the result.
    """
    if mode not in CORRELATION_MODES:
        raise ConfigError(f"unknown correlation mode {mode!r}")
    m, n = t.counts.shape
    if min(m, n) < 2:
        raise DegenerateTableError(
            f"degenerate table: need at least 2x2 categories, got {m}x{n}",
            stage="correlation")
    counts = t.counts.astype(float)

    if mode == "standard":
        total = counts.sum()
        if total <= 0:
            raise DegenerateTableError("degenerate table: no co-occurrences",
                                       stage="correlation")
        cell = counts / total
        row = cell.sum(axis=1)
        col = cell.sum(axis=0)
    else:
        cell = _reciprocal_fraction(counts)
        row = _reciprocal_fraction(counts.sum(axis=1))
        col = _reciprocal_fraction(counts.sum(axis=0))

    expected = np.outer(row, col)
    mask = expected > 0
    deviation = np.zeros_like(expected)
    deviation[mask] = (cell[mask] - expected[mask]) ** 2 / expected[mask]
    value = float(deviation.sum()) / (min(m, n) - 1)
    if mode == "standard":
        value = min(1.0, max(0.0, value))
    return value


def _reciprocal_fraction(counts: np.ndarray) -> np.ndarray:
    safe = np.where(counts > 0, counts, 1.0)
    return np.where(counts > 0, 1.0 - 1.0 / safe, 0.0)


def correlation_matrix(artifacts: Sequence[ChangeRequestArtifact],
                       universe: Mapping[str, frozenset[str]],
                       mode: str = "standard") -> CorrelationMatrix:
    """Pairwise chi-square over all artifacts, computed once per pair.

    Pairs whose table is degenerate get correlation 0; one summary warning
    reports how many.  The diagonal is 1 by definition.
    """
    if len(artifacts) < 2:
        raise DataError("correlation needs at least 2 artifacts",
                        stage="correlation")
    n = len(artifacts)
    values = np.eye(n)
    degenerate = 0
    for i in range(n):
        for j in range(i + 1, n):
            try:
                v = chi_square(
                    contingency_table(artifacts[i], artifacts[j], universe),
                    mode)
            except DegenerateTableError as exc:
                logger.debug("pair (%s, %s) degenerate: %s",
                             artifacts[i].kind.label, artifacts[j].kind.label,
                             exc)
                degenerate += 1
                v = 0.0
            values[i, j] = values[j, i] = v
    if degenerate:
        logger.warning("%d of %d artifact pairs had degenerate contingency "
                       "tables; their correlation was recorded as 0",
                       degenerate, n * (n - 1) // 2)
    return CorrelationMatrix(kinds=tuple(a.kind for a in artifacts),
                             values=values)


def correlation_matrix_to_csv(matrix: CorrelationMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    labels = [k.label for k in matrix.kinds]
    writer.writerow(["kind"] + labels)
    for label, row in zip(labels, matrix.values):
        writer.writerow([label] + [repr(float(v)) for v in row])
    return buf.getvalue()


def dissimilarity_matrix(matrix: CorrelationMatrix) -> np.ndarray:
    """Clustering distance 1 - correlation, clamped non-negative, zero diag."""
    d = np.maximum(0.0, 1.0 - matrix.values)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def default_num_sets(n: int) -> int:
    """Default cluster count round(sqrt(n/2)), clamped into [1, n]."""
    return max(1, min(n, round(math.sqrt(n / 2))))


@dataclass
class PamResult:
    medoid_indices: list[int]
    assignment: np.ndarray
    cost_history: list[float]

    @property
    def cost(self) -> float:
        return self.cost_history[-1]


def _greedy_build(arr: np.ndarray, order: Sequence[int], k: int) -> list[int]:
    # repeatedly add the candidate that lowers total cost most, scanning
    # candidates in seed-shuffled order so ties are seed-determined
    medoids: list[int] = []
    nearest = np.full(arr.shape[0], np.inf)
    for _ in range(k):
        best, best_cost = -1, math.inf
        for c in order:
            if c in medoids:
                continue
            cost = float(np.minimum(nearest, arr[c]).sum())
            if cost < best_cost:
                best, best_cost = c, cost
        medoids.append(best)
        nearest = np.minimum(nearest, arr[best])
    return medoids


def _pam_run(arr: np.ndarray, k: int, medoids: list[int]):
    n = arr.shape[0]
    assignment: np.ndarray | None = None
    costs: list[float] = []
    for _ in range(MAX_MEDOID_ROUNDS):
        new_assignment = _assign_to(arr, medoids)
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for pos in range(k):
            members = np.where(assignment == pos)[0]
            within = arr[np.ix_(members, members)].sum(axis=1)
            medoids[pos] = int(members[int(np.argmin(within))])
        costs.append(float(arr[np.arange(n), np.asarray(medoids)[assignment]].sum()))
    assert assignment is not None

    # swap refinement: the alternation above only ever moves a medoid within
    # its current cluster, so it can stall above the reachable optimum
    current = float(arr[:, medoids].min(axis=1).sum())
    for _ in range(MAX_MEDOID_ROUNDS):
        best_cost, best_swap = current, None
        for pos in range(k):
            for h in range(n):
                if h in medoids:
                    continue
                trial = list(medoids)
                trial[pos] = h
                cost = float(arr[:, trial].min(axis=1).sum())
                if cost < best_cost:
                    best_cost, best_swap = cost, (pos, h)
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        current = best_cost
        costs.append(current)
        assignment = _assign_to(arr, medoids)
    return medoids, assignment, costs


def _assign_to(arr: np.ndarray, medoids: list[int]) -> np.ndarray:
    assignment = np.argmin(arr[:, np.asarray(medoids)], axis=1)
    for pos, medoid in enumerate(medoids):
        assignment[medoid] = pos
    return assignment


def pam_cluster(dist, k: int, seed: int = 0) -> PamResult:
    """k-medoids: pick k data points as medoids minimizing the summed
    dissimilarity of every point to its nearest medoid.

    When the number of candidate medoid subsets is at most
    PAM_EXHAUSTIVE_LIMIT the optimum is found by enumeration.  Otherwise a
    PAM search runs from PAM_RESTARTS seeded starts (one greedy build, the
    rest random subsets): each start alternates assignment and per-cluster
    medoid recomputation until stable, then applies single-swap refinement
    until no medoid/non-medoid exchange lowers total cost, and the cheapest
    run wins.  Deterministic for a fixed seed; within the winning run cost
    never increases between recorded steps.
    """
    arr = check_dissimilarity(dist)
    n = arr.shape[0]
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= n:
        raise DataError(f"k out of range: need 1 <= k <= {n}, got {k!r}",
                        stage="correlation")

    if math.comb(n, k) <= PAM_EXHAUSTIVE_LIMIT:
        combos = np.array(list(itertools.combinations(range(n), k)),
                          dtype=np.intp)
        totals = arr[:, combos].min(axis=2).sum(axis=0)
        medoids = [int(i) for i in combos[int(np.argmin(totals))]]
        return PamResult(medoid_indices=medoids,
                         assignment=_assign_to(arr, medoids),
                         cost_history=[float(totals.min())])

    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    starts = [_greedy_build(arr, order, k)]
    for _ in range(PAM_RESTARTS - 1):
        starts.append(sorted(rng.sample(range(n), k)))

    best = None
    for start in starts:
        medoids, assignment, costs = _pam_run(arr, k, list(start))
        if best is None or costs[-1] < best[2][-1]:
            best = (medoids, assignment, costs)
    return PamResult(medoid_indices=best[0], assignment=best[1],
                     cost_history=best[2])


def k_medoids(dist, k: int, seed: int = 0,
              labels: Sequence | None = None) -> list[CorrelatedArtifactSet]:
    """Cluster points of a dissimilarity matrix into k medoid-labeled sets."""
    result = pam_cluster(dist, k, seed)
    n = result.assignment.shape[0]
    if labels is None:
        labels = list(range(n))
    elif len(labels) != n:
        raise DataError(f"expected {n} labels, got {len(labels)}",
                        stage="correlation")
    groups: list[list] = [[] for _ in range(k)]
    for point, pos in enumerate(result.assignment):
        groups[pos].append(labels[point])
    sets = [CorrelatedArtifactSet(medoid=labels[m], members=tuple(sorted(g)))
            for m, g in zip(result.medoid_indices, groups)]
    return sorted(sets, key=lambda s: s.medoid)


def correlated_sets(matrix: CorrelationMatrix, k: int,
                    seed: int = 0) -> list[CorrelatedArtifactSet]:
    return k_medoids(dissimilarity_matrix(matrix), k, seed, labels=matrix.kinds)
