"""Estimator wiring the full pipeline behind a fit/predict interface.

fit() consumes a historical corpus (change requests plus revision events),
builds the artifact graph and correlation clusters, and freezes the
threshold band and per-artifact scores.  predict() classifies new requests
against that frozen state.  A report dict round-trips the frozen state so
scoring can run later without refitting.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import correlation as corr
from . import dfp as dfp_mod
from . import graph as graph_mod
from .errors import ChangeRiskError, DataError
from .evaluate import POSITIVE_CLASSES
from .ingest import (DEFAULT_ID_PATTERNS, DEFAULT_MIN_TOKEN_OVERLAP,
                     LINK_MODES, ChangeRequest, RevisionEvent, link_revisions)
from .taxonomy import (ArtifactKind, ClassificationRuleSet, build_artifacts,
                       classify, default_rules, parse_rules_lines,
                       rules_to_lines)
from .textprep import descriptive_tokens
from .validation import (check_change_requests, check_int_at_least,
                         check_mode, check_positive_real)

STEMMERS = ("suffix", "porter")


@contextmanager
def _stage(name: str):
    """Tag escaping pipeline errors with the stage they came from."""
    try:
        yield
    except ChangeRiskError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


class ReportScorer:
    """Classify change requests against frozen artifact scores and band."""

    def __init__(self, artifact_dfps: Mapping[ArtifactKind, float],
                 band: dfp_mod.ThresholdBand, *,
                 rules: ClassificationRuleSet,
                 stop_words: frozenset[str] | None,
                 stemmer: str,
                 effective_rule: str):
        self.artifact_dfps = dict(artifact_dfps)
        self.band = band
        self.rules = rules
        self.stop_words = stop_words
        self.stemmer = stemmer
        self.effective_rule = effective_rule

    def score_one(self, cr: ChangeRequest) -> tuple[float, str]:
        tokens = descriptive_tokens(cr, stop_words=self.stop_words,
                                    stemmer=self.stemmer)
        kinds = classify(cr, tokens, self.rules)
        known = [k for k in kinds if k in self.artifact_dfps]
        if not known:
            # none of the request's kinds were seen while fitting; fall back
            # to the neutral mean score so classification stays total
            value = self.band.dfpt
            return value, dfp_mod.classify_value(value, self.band)
        return dfp_mod.classify_request(known, self.artifact_dfps, self.band,
                                        self.effective_rule)

    @classmethod
    def from_report_dict(cls, report: dict) -> "ReportScorer":
        try:
            params = report["params"]
            artifact_dfps = {ArtifactKind.from_label(entry["kind"]): entry["dfp"]
                             for entry in report["artifacts"]}
            band = dfp_mod.ThresholdBand.from_dict(report["band"])
            stemmer = params["stemmer"]
            rules = parse_rules_lines(params["rules"], stemmer=stemmer)
            stop_words = params["stop_words"]
            effective_rule = params["effective_dfp"]
        except (KeyError, TypeError) as exc:
            raise DataError(f"analysis report is missing field {exc}",
                            stage="score") from exc
        return cls(artifact_dfps, band, rules=rules,
                   stop_words=None if stop_words is None
                   else frozenset(stop_words),
                   stemmer=stemmer, effective_rule=effective_rule)


class FaultPronenessClassifier(BaseEstimator):
    """Three-way fault-proneness classifier for change requests.

    Parameters
    ----------
    correlation_mode : {"standard", "reciprocal"}
        Contingency-coefficient form used between artifacts.
    hits_mode : {"converged", "single_pass"}
        Hub-authority weighting scheme on the block/artifact graph.
    tolerance, max_hits_iterations :
        Convergence controls for the converged hub-authority mode.
    k : int or "auto"
        Number of correlated artifact sets; "auto" uses round(sqrt(n/2)).
    seed : int
        Drives medoid tie-breaking; fixing it makes fits reproducible.
    effective_dfp : {"max", "mean"}
        How a request spanning several artifacts combines their scores.
    link_mode : {"explicit_id", "token_overlap", "both"}
        How revision events get attached to change requests.
    min_token_overlap : int
        Minimum shared tokens for a token_overlap link.
    id_patterns : sequence of regex strings, optional
        Explicit-id patterns; None selects the built-in defaults.
    stop_words : frozenset of str, optional
        Stop-word override; None selects the embedded default list.
    rules : ClassificationRuleSet or sequence of rule lines, optional
        Taxonomy mapping rules; None selects the embedded defaults.
    stemmer : {"suffix", "porter"}
    use_correlation : bool
        False replaces clustering with one singleton set per artifact,
        which is the correlation-free baseline.
    """

    def __init__(self, *, correlation_mode: str = "standard",
                 hits_mode: str = "converged",
                 tolerance: float = graph_mod.DEFAULT_TOLERANCE,
                 max_hits_iterations: int = graph_mod.DEFAULT_MAX_ITER,
                 k: int | str = "auto",
                 seed: int = 0,
                 effective_dfp: str = "max",
                 link_mode: str = "both",
                 min_token_overlap: int = DEFAULT_MIN_TOKEN_OVERLAP,
                 id_patterns: Sequence[str] | None = None,
                 stop_words: frozenset[str] | None = None,
                 rules: ClassificationRuleSet | Sequence[str] | None = None,
                 stemmer: str = "suffix",
                 use_correlation: bool = True):
        self.correlation_mode = correlation_mode
        self.hits_mode = hits_mode
        self.tolerance = tolerance
        self.max_hits_iterations = max_hits_iterations
        self.k = k
        self.seed = seed
        self.effective_dfp = effective_dfp
        self.link_mode = link_mode
        self.min_token_overlap = min_token_overlap
        self.id_patterns = id_patterns
        self.stop_words = stop_words
        self.rules = rules
        self.stemmer = stemmer
        self.use_correlation = use_correlation

    # -- parameter resolution -------------------------------------------

    def _check_params(self) -> None:
        check_mode("correlation_mode", self.correlation_mode,
                   corr.CORRELATION_MODES)
        check_mode("hits_mode", self.hits_mode, graph_mod.HITS_MODES)
        check_mode("effective_dfp", self.effective_dfp,
                   dfp_mod.EFFECTIVE_DFP_RULES)
        check_mode("link_mode", self.link_mode, LINK_MODES)
        check_mode("stemmer", self.stemmer, STEMMERS)
        check_positive_real("tolerance", self.tolerance)
        check_int_at_least("max_hits_iterations", self.max_hits_iterations, 1)
        check_int_at_least("min_token_overlap", self.min_token_overlap, 1)
        check_int_at_least("seed", self.seed, -(2 ** 63))
        if self.k != "auto":
            check_int_at_least("k", self.k, 1)

    def _resolved_rules(self) -> ClassificationRuleSet:
        if self.rules is None:
            return default_rules(self.stemmer)
        if isinstance(self.rules, ClassificationRuleSet):
            return self.rules
        return parse_rules_lines(self.rules, stemmer=self.stemmer)

    def _resolved_patterns(self) -> tuple[str, ...]:
        if self.id_patterns is None:
            return DEFAULT_ID_PATTERNS
        return tuple(self.id_patterns)

    # -- fitting ----------------------------------------------------------

    def fit(self, change_requests: Iterable[ChangeRequest],
            revision_events: Iterable[RevisionEvent]
            ) -> "FaultPronenessClassifier":
        """Fit the artifact scores and threshold band on a corpus."""
        self._check_params()
        rules = self._resolved_rules()

        with _stage("ingest"):
            crs = check_change_requests(change_requests)
            if not crs:
                raise DataError("no change requests in corpus")
            events = link_revisions(list(revision_events), crs,
                                    self.link_mode,
                                    id_patterns=self._resolved_patterns(),
                                    min_overlap=self.min_token_overlap,
                                    stop_words=self.stop_words,
                                    stemmer=self.stemmer)

        with _stage("taxonomy"):
            assignments = {}
            for cr in crs:
                tokens = descriptive_tokens(cr, stop_words=self.stop_words,
                                            stemmer=self.stemmer)
                assignments[cr.id] = classify(cr, tokens, rules)
            artifacts = build_artifacts(crs, assignments)
            if len(artifacts) < 2:
                raise DataError(
                    "pipeline needs at least 2 distinct artifacts; corpus "
                    f"maps to {len(artifacts)}")

        with _stage("graph"):
            bipartite = graph_mod.build_graph(events, artifacts)
            hits = graph_mod.run_hits(bipartite, self.hits_mode,
                                      self.tolerance,
                                      self.max_hits_iterations)
            scores = {score.kind: score.rs
                      for score in graph_mod.revision_support(bipartite, hits)}

        with _stage("correlation"):
            n = len(artifacts)
            if self.use_correlation:
                matrix = corr.correlation_matrix(
                    artifacts, corr.blocks_by_request(events),
                    self.correlation_mode)
                k = (corr.default_num_sets(n) if self.k == "auto"
                     else self.k)
                sets = corr.correlated_sets(matrix, k, self.seed)
            else:
                matrix = None
                k = n
                sets = [corr.CorrelatedArtifactSet(medoid=a.kind,
                                                   members=(a.kind,))
                        for a in artifacts]

        with _stage("dfp"):
            report = dfp_mod.compute_report(sets, scores, assignments,
                                            self.effective_dfp)

        self.change_requests_ = tuple(crs)
        self.events_ = tuple(events)
        self.artifacts_ = tuple(artifacts)
        self.graph_ = bipartite
        self.hits_ = hits
        self.correlation_matrix_ = matrix
        self.k_ = k
        self.sets_ = tuple(sets)
        self.scores_ = scores
        self.artifact_dfps_ = report.artifact_dfps
        self.band_ = report.band
        self.report_ = report
        return self

    # -- prediction -------------------------------------------------------

    def _scorer(self) -> ReportScorer:
        if not hasattr(self, "report_"):
            raise NotFittedError(
                "this FaultPronenessClassifier instance is not fitted yet")
        return ReportScorer(self.artifact_dfps_, self.band_,
                            rules=self._resolved_rules(),
                            stop_words=self.stop_words,
                            stemmer=self.stemmer,
                            effective_rule=self.effective_dfp)

    def predict(self, change_requests: Iterable[ChangeRequest]) -> list[str]:
        """Fault class per request: safe / possibly / highly fault prone."""
        scorer = self._scorer()
        return [scorer.score_one(cr)[1] for cr in change_requests]

    def predict_dfp(self, change_requests: Iterable[ChangeRequest]) -> list[float]:
        """Effective degree-of-fault-proneness value per request."""
        scorer = self._scorer()
        return [scorer.score_one(cr)[0] for cr in change_requests]

    def score(self, change_requests: Sequence[ChangeRequest],
              truth: Sequence[bool]) -> float:
        """Binary accuracy: fault-prone prediction vs boolean truth."""
        crs = list(change_requests)
        if len(crs) != len(truth):
            raise DataError("truth labels do not match request count",
                            stage="evaluate")
        if not crs:
            raise DataError("cannot score an empty request list",
                            stage="evaluate")
        predictions = self.predict(crs)
        hits = sum(1 for cls, actual in zip(predictions, truth)
                   if (cls in POSITIVE_CLASSES) == bool(actual))
        return hits / len(crs)

    # -- report round-trip -------------------------------------------------

    def to_report_dict(self) -> dict:
        """Self-contained analysis report; feeds ReportScorer later."""
        if not hasattr(self, "report_"):
            raise NotFittedError(
                "this FaultPronenessClassifier instance is not fitted yet")
        report = self.report_.to_dict()
        report["params"] = {
            "correlation_mode": self.correlation_mode,
            "hits_mode": self.hits_mode,
            "tolerance": self.tolerance,
            "max_hits_iterations": self.max_hits_iterations,
            "k": self.k_,
            "seed": self.seed,
            "effective_dfp": self.effective_dfp,
            "link_mode": self.link_mode,
            "min_token_overlap": self.min_token_overlap,
            "id_patterns": list(self._resolved_patterns()),
            "stemmer": self.stemmer,
            "use_correlation": self.use_correlation,
            "stop_words": (None if self.stop_words is None
                           else sorted(self.stop_words)),
            "rules": rules_to_lines(self._resolved_rules()),
        }
        return report
