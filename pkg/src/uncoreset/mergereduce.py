"""Merge-reduce: turn a low-discrepancy coloring routine into a small coreset.

The input is split into 2^q equal parts of size at least c_part * g. Stage 1
runs epochs of beta+3 steps: in the first beta+2 steps every pair of sets is
merged, colored and halved; in the last step pairs are merged without a
coloring, so set sizes double once per epoch. When one set remains, stage 2
keeps coloring and halving it until it has at most g points. The kept side
of every coloring is chosen at random, which makes the signed error zero in
expectation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .artifact import CoresetArtifact, RoundRecord
from .discrepancy import Coloring
from .meter import ErrorMeter
from .model import UncertainPointSet
from .ranges import FamilyDescriptor

# rows of P -> coloring over the ids of those rows
Colorer = Callable[[np.ndarray, int], Coloring]

KEEP = ("random", "plus", "minus")


@dataclass(frozen=True)
class MergeReduceParams:
    beta: float = 2.0
    gamma: float | None = None
    omega: float | None = None
    c_part: float | None = None
    c_size: float = 1.0
    c_disc: float = 4.0
    seed: int = 0
    coloring_budget: int | None = None
    restarts: int = 2
    verify_budget: int = 100_000
    threads: int = 1

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.omega is not None and self.omega < 0:
            raise ValueError("omega must be nonnegative")
        if self.c_part is not None and self.c_part < 2:
            raise ValueError("c_part must be at least 2")
        if self.c_size <= 0 or self.c_disc <= 0:
            raise ValueError("size and discrepancy constants must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @property
    def part_factor(self) -> float:
        return 4 * (self.beta + 2) if self.c_part is None else self.c_part

    def with_defaults(self, gamma: float, omega: float) -> MergeReduceParams:
        return replace(
            self,
            gamma=gamma if self.gamma is None else self.gamma,
            omega=omega if self.omega is None else self.omega,
        )


def coreset_size(eps: float, params: MergeReduceParams) -> int:
    """g = ceil(c_size * (gamma/eps) * max(1, log2(gamma/eps))^omega), rounded up to even."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if params.gamma is None or params.omega is None:
        raise ValueError("gamma and omega must be set")
    ratio = params.gamma / eps
    g = math.ceil(params.c_size * ratio * max(1.0, math.log2(ratio)) ** params.omega)
    return g + (g % 2)


def halve(
    S: np.ndarray, chi: Coloring, rng: np.random.Generator, ids: np.ndarray, keep: str = "random"
) -> tuple[np.ndarray, int]:
    """Keep the +1 or -1 side of ``chi`` over rows ``S``; returns (rows, kept sign)."""
    if len(S) < 2:
        raise ValueError("halving needs at least two points")
    if keep not in KEEP:
        raise ValueError(f"keep must be one of {KEEP}")
    signs = chi.array_for(ids[S])
    if keep == "random":
        side = 1 if rng.random() < 0.5 else -1
    else:
        side = 1 if keep == "plus" else -1
    return S[signs == side], side


def _parts(n: int, m: float, rng: np.random.Generator) -> list[np.ndarray]:
    q = max(0, int(math.floor(math.log2(n / m)))) if n > m else 0
    order = rng.permutation(n)
    return [np.sort(p) for p in np.array_split(order, 2**q)]


def merge_reduce(
    P: UncertainPointSet,
    family: FamilyDescriptor,
    eps: float,
    params: MergeReduceParams,
    coloring: Colorer,
    kind: str = "re",
    keep: str = "random",
    meter: ErrorMeter | None = None,
) -> CoresetArtifact:
    g = coreset_size(eps, params)
    base = {
        "eps": eps,
        "g": g,
        "beta": params.beta,
        "gamma": params.gamma,
        "omega": params.omega,
        "c_part": params.part_factor,
        "c_size": params.c_size,
        "c_disc": params.c_disc,
    }
    if g >= P.n:
        return CoresetArtifact(P, kind, "discrepancy", base, params.seed, (), {"trivial": True})

    meter = meter or ErrorMeter(P, family, budget=params.verify_budget, seed=params.seed)
    measure = meter.re if kind == "re" else lambda a, b: meter.rc(a, b)[:2]
    ids = np.array(P.ids, dtype=np.int64)
    sets = _parts(P.n, params.part_factor * g, np.random.default_rng([params.seed, 0]))
    n_parts = len(sets)
    ledger: list[RoundRecord] = []
    period = int(round(params.beta)) + 3
    step = 0

    def color_halve(groups: list[np.ndarray], stage: int) -> list[np.ndarray]:
        nonlocal step
        step += 1
        rngs = [np.random.default_rng([params.seed, step, i]) for i in range(len(groups))]
        seeds = [int(r.integers(2**31 - 1)) for r in rngs]
        tasks = list(zip(groups, seeds))
        if params.threads > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=params.threads) as pool:
                colorings = list(pool.map(lambda a: coloring(*a), tasks))
        else:
            colorings = [coloring(*a) for a in tasks]
        kept = [halve(G, chi, r, ids, keep)[0] for G, chi, r in zip(groups, colorings, rngs)]
        before, after = np.concatenate(groups), np.concatenate(kept)
        discs = tuple(int(c.disc) for c in colorings)
        ledger.append(
            RoundRecord(
                step,
                stage,
                True,
                len(groups[0]),
                len(kept),
                discs,
                max(Fraction(c, len(G)) for c, G in zip(discs, groups)),
                measure(before, after)[0],
            )
        )
        return kept

    while len(sets) > 1:
        merged = [np.concatenate([sets[i], sets[i + 1]]) for i in range(0, len(sets), 2)]
        if (step + 1) % period == 0:
            step += 1
            ledger.append(
                RoundRecord(step, 1, False, len(merged[0]), len(merged), (), Fraction(0), Fraction(0))
            )
            sets = merged
        else:
            sets = color_halve(merged, 1)
    T = sets[0]
    while len(T) > g:
        T = color_halve([T], 2)[0]

    Tset = P.take(np.sort(T))
    stats = {"trivial": False, "parts": n_parts}
    return CoresetArtifact(Tset, kind, "discrepancy", base, params.seed, tuple(ledger), stats)
