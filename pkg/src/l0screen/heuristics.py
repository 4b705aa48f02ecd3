"""Feasible incumbents from relaxation output.

Rounding reads the support off the relaxation's residual scores and
refits ridge coefficients on it; an optional swap/add/drop local search
polishes the support.  These incumbents supply the upper bounds the
screening rules and branch-and-bound pruning run on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import (
    Incumbent,
    Instance,
    InvalidInputError,
    ProblemSpec,
    Variant,
    objective_card,
    objective_reg,
    ridge_restricted_solve,
)
from .relax import RelaxSolution


@dataclass(frozen=True)
class HeuristicConfig:
    swap_rounds: int = 0

    def __post_init__(self):
        if self.swap_rounds < 0:
            raise InvalidInputError("swap_rounds must be >= 0")


def _scores(inst: Instance, relax: RelaxSolution) -> np.ndarray:
    eps = np.asarray(relax.epsilon, dtype=float)
    return (inst.a.T @ eps) ** 2


def _evaluate(inst: Instance, spec: ProblemSpec, support) -> Incumbent:
    support = tuple(sorted(int(i) for i in support))
    if support:
        x, _ = ridge_restricted_solve(inst, spec.gamma, support)
    else:
        x = np.zeros(inst.n)
    if spec.variant is Variant.REG:
        obj = objective_reg(inst, spec, support, x)
    else:
        obj = objective_card(inst, spec, support, x)
    return Incumbent(support=support, x=x, objective=obj)


def round_card(inst: Instance, gamma: float, k: int, relax: RelaxSolution) -> Incumbent:
    """Keep the k best-scoring variables and refit.

    Ties are broken toward the lower index.
    """
    if not (1 <= int(k) <= inst.n):
        raise InvalidInputError(f"k must lie in [1, {inst.n}]")
    delta = _scores(inst, relax)
    order = np.argsort(-delta, kind="stable")
    support = order[: int(k)]
    return _evaluate(inst, ProblemSpec.card(gamma, int(k)), support)


def round_reg(inst: Instance, gamma: float, mu: float, relax: RelaxSolution) -> Incumbent:
    """Keep every variable whose score clears the selection price.

    The support is ``{i : gamma delta_i >= mu}``; when it is empty the
    zero solution is returned.
    """
    if mu <= 0:
        raise InvalidInputError("mu must be positive")
    delta = _scores(inst, relax)
    support = np.flatnonzero(gamma * delta >= mu)
    return _evaluate(inst, ProblemSpec.reg(gamma, mu), support)


def local_search_swap(inst: Instance, spec: ProblemSpec, incumbent: Incumbent, rounds: int) -> Incumbent:
    """Steepest-descent local search: take the best move per round.

    Card moves swap one support member for one outsider (support size
    is preserved); reg moves add or drop a single variable.  Candidates
    are enumerated in index order and each is refit by restricted
    ridge, so the procedure is deterministic; it stops early when no
    move strictly improves.
    """
    best = incumbent
    for _ in range(rounds):
        cur = set(best.support)
        outside = [i for i in range(inst.n) if i not in cur]
        candidates = []
        if spec.variant is Variant.CARD:
            for j in sorted(cur):
                for i in outside:
                    candidates.append(cur - {j} | {i})
        else:
            for i in outside:
                candidates.append(cur | {i})
            for j in sorted(cur):
                candidates.append(cur - {j})
        improved = None
        for cand in candidates:
            trial = _evaluate(inst, spec, cand)
            if trial.objective < best.objective and (
                improved is None or trial.objective < improved.objective
            ):
                improved = trial
        if improved is None:
            break
        best = improved
    return best
