"""Teacher-performance metrics and failure-mode detectors.

Efficacy is the fraction of the finite test set the learned policy performs
correctly; efficiency normalizes it by the number of demonstrations. Each
demonstration is classified as Incorrect / Ambiguous / Informative from its
own task membership, the efficacy change it produced, and its similarity to
the demonstrations already given.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .tasks import MembershipResult, Trajectory

INFORMATIVE = "Informative"
AMBIGUOUS = "Ambiguous"
INCORRECT = "Incorrect"
MEMBERSHIP_INVALID = "MembershipInvalid"


@dataclass(frozen=True)
class RealizationRecord:
    """A realization at one test item with its cached membership verdict."""

    test_item: int
    trajectory: Trajectory
    membership: MembershipResult


@dataclass(frozen=True)
class EfficacyReport:
    successes: int
    test_size: int
    outcomes: tuple            # per-item booleans, index order

    def __post_init__(self):
        if self.successes != sum(self.outcomes):
            raise ValueError("successes must equal the outcome count")
        if self.test_size != len(self.outcomes):
            raise ValueError("test_size must equal the number of outcomes")

    @property
    def efficacy(self) -> float:
        return self.successes / self.test_size

    def successful_items(self) -> frozenset:
        return frozenset(i for i, ok in enumerate(self.outcomes) if ok)


@dataclass(frozen=True)
class MetricsConfig:
    """Thresholds for the failure detectors.

    ambiguity_threshold   delta_a, meters, on trajectory similarity
    delta_bounds          (delta_l, delta_u) efficacy-fraction band for
                          "little or no improvement"
    similarity_resample_len  common length for trajectory comparison
    """

    ambiguity_threshold: float = 0.02
    delta_bounds: tuple = (-0.01, 0.02)
    similarity_resample_len: int = 100

    def __post_init__(self):
        lo, hi = self.delta_bounds
        if not lo < hi:
            raise ValueError("delta_bounds must satisfy delta_l < delta_u")

    @staticmethod
    def for_maze() -> "MetricsConfig":
        return MetricsConfig(ambiguity_threshold=0.02)

    @staticmethod
    def for_pickplace() -> "MetricsConfig":
        return MetricsConfig(ambiguity_threshold=0.05)


@dataclass(frozen=True)
class DemoClassification:
    label: str
    delta_nu: float
    similarity: float

    def to_dict(self) -> dict:
        return {"label": self.label, "delta_nu": self.delta_nu, "similarity": self.similarity}


def efficacy(realizations, test_size: int) -> EfficacyReport:
    """One record per test item; efficacy = member count / test size."""
    if test_size <= 0:
        raise ValueError("test_size must be positive")
    seen = {}
    for rec in realizations:
        if rec.test_item in seen:
            raise ValueError(f"duplicate realization for test item {rec.test_item}")
        seen[rec.test_item] = rec.membership.is_member
    if sorted(seen) != list(range(test_size)):
        missing = sorted(set(range(test_size)) - set(seen))
        raise ValueError(f"missing realizations for test items {missing[:5]}...")
    outcomes = tuple(seen[i] for i in range(test_size))
    return EfficacyReport(sum(outcomes), test_size, outcomes)


def efficiency(nu: float, demo_count: int) -> float:
    if demo_count < 1:
        raise ValueError("efficiency is undefined before any demonstration")
    if not 0.0 <= nu <= 1.0:
        raise ValueError("efficacy must lie in [0, 1]")
    return nu / demo_count


def similarity(candidate: Trajectory, existing, config: MetricsConfig) -> float:
    """Min over prior demos of the mean pointwise distance after resampling
    both trajectories to a common normalized-time grid. Smaller = more similar."""
    if not existing:
        raise ValueError("similarity needs at least one existing demonstration")
    n = config.similarity_resample_len
    cand = candidate.resampled(n).pos
    best = np.inf
    for demo in existing:
        other = demo.resampled(n).pos
        best = min(best, float(np.linalg.norm(cand - other, axis=1).mean()))
    return best


def classify_demo(nu_m: float, nu_prev: float, s: float,
                  demo_membership: MembershipResult,
                  config: MetricsConfig) -> DemoClassification:
    """Rule order: membership failure dominates, then degradation, then
    ambiguity, else informative. A demo whose membership could not be
    assessed at all (missing gripper actions) is MembershipInvalid."""
    for v in (nu_m, nu_prev):
        if not 0.0 <= v <= 1.0:
            raise ValueError("efficacy values must lie in [0, 1]")
    dnu = nu_m - nu_prev
    lo, hi = config.delta_bounds
    if demo_membership.missing_actions:
        return DemoClassification(MEMBERSHIP_INVALID, dnu, s)
    if not demo_membership.is_member:
        return DemoClassification(INCORRECT, dnu, s)
    if dnu <= lo and dnu <= 0.0:
        return DemoClassification(INCORRECT, dnu, s)
    if s <= config.ambiguity_threshold and lo <= dnu <= hi:
        return DemoClassification(AMBIGUOUS, dnu, s)
    return DemoClassification(INFORMATIVE, dnu, s)


def undemonstrated_states(report: EfficacyReport, demo_covered) -> frozenset:
    """Test items neither performed successfully nor covered by a demo."""
    all_items = frozenset(range(report.test_size))
    return all_items - report.successful_items() - frozenset(demo_covered)


def generalisation_set(report: EfficacyReport, demo_covered) -> frozenset:
    """Successful test items that were never demonstrated."""
    return report.successful_items() - frozenset(demo_covered)


@dataclass(frozen=True)
class StepMetrics:
    step: int                   # 1-based demonstration count
    nu: float
    eta: float
    classification: DemoClassification


@dataclass(frozen=True)
class MetricsReport:
    """Per-step metrics plus session totals in the failure taxonomy."""

    steps: tuple                    # StepMetrics, ordered
    final_eta: float
    eta_demo_count: int             # demos used for the final eta (90% rule)
    incorrect_count: int
    ambiguous_count: int
    undemonstrated_count: int
    generalisation_count: int
    config: MetricsConfig

    @property
    def plain_eta(self) -> float:
        """Final efficacy over all demonstrations, without the 90% rule."""
        return self.steps[-1].eta

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "steps": [
                {"step": s.step, "nu": s.nu, "eta": s.eta,
                 "classification": s.classification.to_dict()}
                for s in self.steps],
            "final_eta": self.final_eta,
            "plain_eta": self.plain_eta,
            "eta_demo_count": self.eta_demo_count,
            "totals": {
                "incorrect": self.incorrect_count,
                "ambiguous": self.ambiguous_count,
                "undemonstrated_states": self.undemonstrated_count,
                "generalisation": self.generalisation_count,
            },
            "config": {
                "ambiguity_threshold": self.config.ambiguity_threshold,
                "delta_bounds": list(self.config.delta_bounds),
                "similarity_resample_len": self.config.similarity_resample_len,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        """Fixed-layout table of the failure counts plus the headline metrics."""
        lines = [
            "teaching session report",
            "-----------------------",
            f"{'Demonstrations':<28}{len(self.steps):>8}",
            f"{'Final efficacy':<28}{(self.steps[-1].nu if self.steps else 0.0):>8.3f}",
            f"{'Efficiency (90% rule)':<28}{self.final_eta:>8.3f}",
            f"{'  demos counted':<28}{self.eta_demo_count:>8}",
            "-----------------------",
            f"{'Demonstration Errors':<28}{self.incorrect_count:>8}",
            f"{'Undemonstrated States':<28}{self.undemonstrated_count:>8}",
            f"{'Ambiguous Demonstrations':<28}{self.ambiguous_count:>8}",
        ]
        return "\n".join(lines) + "\n"


def ninety_percent_demo_count(nus) -> int:
    """Demos needed to first reach 90% efficacy, else all demonstrations."""
    for i, nu in enumerate(nus, start=1):
        if nu >= 0.9:
            return i
    return len(nus)


def build_report(nus, classifications, final_report: EfficacyReport,
                 demo_covered, config: MetricsConfig) -> MetricsReport:
    if not nus:
        raise ValueError("a report needs at least one completed step")
    steps = tuple(
        StepMetrics(i, nu, efficiency(nu, i), cls)
        for i, (nu, cls) in enumerate(zip(nus, classifications), start=1))
    m90 = ninety_percent_demo_count(nus)
    final_eta = efficiency(nus[m90 - 1], m90)
    undemo = undemonstrated_states(final_report, demo_covered)
    gen = generalisation_set(final_report, demo_covered)
    return MetricsReport(
        steps=steps,
        final_eta=final_eta,
        eta_demo_count=m90,
        incorrect_count=sum(1 for c in classifications if c.label == INCORRECT),
        ambiguous_count=sum(1 for c in classifications if c.label == AMBIGUOUS),
        undemonstrated_count=len(undemo),
        generalisation_count=len(gen),
        config=config,
    )
