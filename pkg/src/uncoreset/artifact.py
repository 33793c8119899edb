"""The coreset artifact shared by all builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import UncertainPointSet

KINDS = ("re", "rc", "rq")
METHODS = ("sample", "discrepancy")


@dataclass(frozen=True)
class RoundRecord:
    """One color-halve (or plain merge) step of merge-reduce."""

    step: int
    stage: int
    halved: bool
    set_size: int  # size of each merged set entering the step
    sets: int  # number of merged sets produced by the step
    pair_discs: tuple  # discrepancy of each pair's coloring
    disc_bound: Fraction  # max over pairs of disc / merged size
    step_error: Fraction  # measured error between the unions before and after


@dataclass(frozen=True)
class CoresetArtifact:
    T: UncertainPointSet
    kind: str
    method: str
    params: dict
    seed: int | None
    ledger: tuple = ()
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown coreset kind {self.kind!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown construction method {self.method!r}")

    @property
    def size(self) -> int:
        return self.T.n

    @property
    def disc_sum(self) -> Fraction:
        return sum((r.disc_bound for r in self.ledger if r.halved), Fraction(0))

    @property
    def ledger_sum(self) -> Fraction:
        return sum((r.step_error for r in self.ledger), Fraction(0))
