"""Verification reports shared by the checkers, the claim runner and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import Expr, to_dsl
from .kernel.numeric import SampleEvidence, ZeroTest

VERDICTS = ("verified", "refuted", "inconclusive")

_FROM_ZERO = {"zero": "verified", "nonzero": "refuted", "inconclusive": "inconclusive"}


def combine(verdicts) -> str:
    verdicts = list(verdicts)
    if any(v == "refuted" for v in verdicts):
        return "refuted"
    if any(v == "inconclusive" for v in verdicts):
        return "inconclusive"
    return "verified"


@dataclass
class VerificationReport:
    claim: str
    verdict: str
    residual: Expr | None = None
    numeric: SampleEvidence | None = None
    paper_agreement: str = "n/a"
    breakdown: list = field(default_factory=list)  # list of (label, VerificationReport)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")

    @classmethod
    def from_zero_test(cls, claim: str, residual: Expr, zt: ZeroTest, **kw) -> "VerificationReport":
        res = zt.normal_form if zt.normal_form is not None else residual
        return cls(claim, _FROM_ZERO[zt.verdict], res, zt.evidence, **kw)

    @classmethod
    def aggregate(cls, claim: str, parts: list, **kw) -> "VerificationReport":
        verdict = combine(r.verdict for _, r in parts)
        numeric = None
        evidences = [r.numeric for _, r in parts if r.numeric is not None]
        if evidences:
            worst = max(evidences, key=lambda ev: ev.max_rel)
            numeric = SampleEvidence(
                samples=sum(ev.samples for ev in evidences),
                max_abs=max(ev.max_abs for ev in evidences),
                max_rel=worst.max_rel,
                witness=worst.witness,
                witness_value=worst.witness_value,
            )
        witness_residual = next((r.residual for _, r in parts if r.verdict == "refuted"), None)
        return cls(claim, verdict, witness_residual, numeric, breakdown=list(parts), **kw)

    def with_expectation(self, expected: str | None) -> "VerificationReport":
        """Record agreement with a verdict the source document asserts."""
        if expected is None:
            self.paper_agreement = "n/a"
        else:
            self.paper_agreement = "agrees" if self.verdict == expected else "conflicts"
        return self

    def to_json(self) -> dict:
        out = {
            "claim": self.claim,
            "verdict": self.verdict,
            "residual": to_dsl(self.residual) if self.residual is not None else None,
            "numeric": self.numeric.to_json() if self.numeric is not None else None,
            "paper_agreement": self.paper_agreement,
        }
        if self.details:
            out["details"] = self.details
        if self.breakdown:
            out["breakdown"] = [dict(label=label, **r.to_json()) for label, r in self.breakdown]
        return out
