"""Degree-of-fault-proneness scores, threshold band, and classification.

Scores cascade: revision support per artifact -> dfp per correlated set ->
dfp per artifact -> mean/stddev band -> per-request class.  Low revision
support means little hub weight backs an artifact, which reads as high
fault proneness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .correlation import CorrelatedArtifactSet
from .errors import ConfigError, DataError
from .taxonomy import ArtifactKind

SAFE = "safe"
POSSIBLY_FAULT_PRONE = "possibly_fault_prone"
HIGHLY_FAULT_PRONE = "highly_fault_prone"

FAULT_CLASSES = (SAFE, POSSIBLY_FAULT_PRONE, HIGHLY_FAULT_PRONE)

EFFECTIVE_DFP_RULES = ("max", "mean")


@dataclass(frozen=True)
class ThresholdBand:
    dfpt: float
    sdv: float
    lower: float
    upper: float

    def to_dict(self) -> dict:
        return {"dfpt": self.dfpt, "sdv": self.sdv,
                "lower": self.lower, "upper": self.upper}

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdBand":
        return cls(dfpt=float(d["dfpt"]), sdv=float(d["sdv"]),
                   lower=float(d["lower"]), upper=float(d["upper"]))


def dfp_of_set(ccras: CorrelatedArtifactSet,
               scores: Mapping[ArtifactKind, float],
               total_artifacts: int) -> float:
    """1 minus the member revision supports' share of the artifact count."""
    if total_artifacts < 1:
        raise DataError("total artifact count must be >= 1", stage="dfp")
    supported = 0.0
    for kind in ccras.members:
        if kind not in scores:
            raise DataError(f"no revision support for artifact {kind.label}",
                            stage="dfp")
        supported += scores[kind]
    return 1.0 - supported / total_artifacts


def dfp_of_artifact(kind: ArtifactKind,
                    sets: Sequence[CorrelatedArtifactSet],
                    set_dfps: Sequence[float]) -> float:
    """1 minus the owning sets' dfp share of the set count."""
    if len(sets) != len(set_dfps):
        raise DataError("sets and set dfps differ in length", stage="dfp")
    owned = [d for s, d in zip(sets, set_dfps) if kind in s.members]
    if not owned:
        raise DataError(f"artifact {kind.label} belongs to no correlated set",
                        stage="dfp")
    return 1.0 - sum(owned) / len(sets)


def threshold_band(artifact_dfps: Sequence[float]) -> ThresholdBand:
    """Mean of the artifact scores with a one-sample-stddev band around it."""
    n = len(artifact_dfps)
    if n < 2:
        raise DataError(f"threshold band needs >= 2 artifact scores, got {n}",
                        stage="dfp")
    mean = sum(artifact_dfps) / n
    sdv = math.sqrt(sum((v - mean) ** 2 for v in artifact_dfps) / (n - 1))
    return ThresholdBand(dfpt=mean, sdv=sdv, lower=mean - sdv, upper=mean + sdv)


def classify_value(dfp: float, band: ThresholdBand) -> str:
    """Band comparison; both band edges resolve to the fault-prone side."""
    if dfp >= band.upper:
        return HIGHLY_FAULT_PRONE
    if dfp >= band.lower:
        return POSSIBLY_FAULT_PRONE
    return SAFE


def effective_dfp(values: Sequence[float], rule: str = "max") -> float:
    if rule not in EFFECTIVE_DFP_RULES:
        raise ConfigError(f"unknown effective-dfp rule {rule!r}")
    if not values:
        raise DataError("no dfp values to combine", stage="dfp")
    if rule == "max":
        return max(values)
    return sum(values) / len(values)


def classify_request(kinds: Sequence[ArtifactKind],
                     artifact_dfps: Mapping[ArtifactKind, float],
                     band: ThresholdBand,
                     rule: str = "max") -> tuple[float, str]:
    """Effective dfp over the request's artifacts plus its class."""
    if not kinds:
        raise DataError("request mapped to no artifacts", stage="dfp")
    values = []
    for kind in kinds:
        if kind not in artifact_dfps:
            raise DataError(f"no dfp recorded for artifact {kind.label}",
                            stage="dfp")
        values.append(artifact_dfps[kind])
    value = effective_dfp(values, rule)
    return value, classify_value(value, band)


@dataclass
class DfpReport:
    sets: tuple[CorrelatedArtifactSet, ...]
    set_dfps: tuple[float, ...]
    artifact_rs: dict[ArtifactKind, float]
    artifact_dfps: dict[ArtifactKind, float]
    band: ThresholdBand
    classifications: dict[str, tuple[float, str]]

    def to_dict(self) -> dict:
        return {
            "sets": [{"medoid": s.medoid.label,
                      "members": [k.label for k in s.members],
                      "dfp": d}
                     for s, d in sorted(zip(self.sets, self.set_dfps),
                                        key=lambda pair: pair[0].medoid)],
            "artifacts": [{"kind": kind.label,
                           "rs": self.artifact_rs[kind],
                           "dfp": self.artifact_dfps[kind]}
                          for kind in sorted(self.artifact_dfps)],
            "band": self.band.to_dict(),
            "classifications": [{"id": rid, "dfp": value, "class": cls}
                                for rid, (value, cls)
                                in sorted(self.classifications.items())],
        }

    def classifications_csv(self) -> str:
        lines = ["request_id,dfp,class"]
        lines += [f"{rid},{value!r},{cls}"
                  for rid, (value, cls) in sorted(self.classifications.items())]
        return "\n".join(lines) + "\n"


def compute_report(sets: Sequence[CorrelatedArtifactSet],
                   scores: Mapping[ArtifactKind, float],
                   assignments: Mapping[str, Sequence[ArtifactKind]],
                   rule: str = "max") -> DfpReport:
    """Cascade set dfps, artifact dfps, the band, and request classes."""
    total_artifacts = len(scores)
    set_dfps = tuple(dfp_of_set(s, scores, total_artifacts) for s in sets)
    artifact_dfps = {kind: dfp_of_artifact(kind, sets, set_dfps)
                     for kind in sorted(scores)}
    band = threshold_band(list(artifact_dfps.values()))
    classifications = {
        rid: classify_request(kinds, artifact_dfps, band, rule)
        for rid, kinds in assignments.items()
    }
    return DfpReport(sets=tuple(sets), set_dfps=set_dfps,
                     artifact_rs=dict(scores), artifact_dfps=artifact_dfps,
                     band=band, classifications=classifications)
