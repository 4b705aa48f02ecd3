"""Exact solvers: exhaustive enumeration and certified branch and bound.

``brute_force`` enumerates supports outright and reports every optimal
support, which makes it the reference oracle for safety checks.
``branch_and_bound`` explores fix patterns best-first, bounding each
node by the certified dual value of its relaxation; screening can fix
variables at the root and optionally at every node.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .problem import (
    FixState,
    Incumbent,
    InfeasibleError,
    Instance,
    InvalidInputError,
    ProblemSpec,
    SizeCapError,
    Variant,
    objective_card,
    objective_reg,
    ridge_restricted_solve,
)
from .relax import (
    RelaxSolution,
    SolverConfig,
    _LIPSCHITZ_PAD,
    _berhu_solve,
    _bound_card_terms,
    _bound_reg_terms,
    _cc_bisection,
    BerhuPenalty,
    operator_norm_sq,
)
from .screening import _rules_card, _rules_reg

_BRUTE_N_CAP = 25
_BRUTE_COMB_CAP = 1_000_000
_PRUNE_SLACK = 1e-9
_OPT_REL_TOL = 1e-9
_NODE_TOL = 1e-8
# Best-first keeps the whole frontier in memory; above this many open
# nodes new work is taken depth-first so memory stays bounded.
_OPEN_NODE_CAP = 1_000_000


class BranchRule(str, Enum):
    LARGEST_DELTA = "largest_delta"
    MOST_FRACTIONAL_Z = "most_fractional_z"


@dataclass(frozen=True)
class BnBConfig:
    time_limit_s: float = 3600.0
    node_limit: int = 1_000_000
    screen_at_root: bool = True
    screen_per_node: bool = False
    branch_rule: BranchRule = BranchRule.LARGEST_DELTA

    def __post_init__(self):
        if self.time_limit_s <= 0:
            raise InvalidInputError("time_limit_s must be positive")
        if self.node_limit < 1:
            raise InvalidInputError("node_limit must be >= 1")


@dataclass(frozen=True)
class Node:
    fixes: NDArray[np.int8]
    lower_bound: float
    depth: int


@dataclass
class BnBStats:
    nodes_explored: int
    wall_time_s: float
    optimal: bool
    best: Incumbent
    root_fixed: int


def _gram_value(g, b, yy, gamma, idx) -> float:
    """Restricted ridge value from precomputed Gram pieces."""
    if len(idx) == 0:
        return float(yy)
    gs = g[np.ix_(idx, idx)] + np.eye(len(idx)) / gamma
    bs = b[list(idx)]
    xs = np.linalg.solve(gs, bs)
    # ||y - A x||^2 + ||x||^2 / gamma collapses to yy - b'x at the solve
    return float(yy - bs @ xs)


def brute_force(inst: Instance, spec: ProblemSpec, fixed=None):
    """Enumerate supports exhaustively.

    Returns ``(incumbent, all_optimal_supports)`` where the support
    list contains every support whose value ties the optimum within
    1e-9 relative.  ``fixed`` optionally pins variables (FixState
    values) before enumeration.  Refuses instances beyond the size caps
    (25 free variables for reg; one million candidate supports for
    card).
    """
    n = inst.n
    if fixed is None:
        forced: list[int] = []
        free = list(range(n))
    else:
        fixed = np.asarray(fixed, dtype=np.int8)
        if fixed.shape[0] != n:
            raise InvalidInputError("fixed length does not match the instance")
        forced = [int(i) for i in np.flatnonzero(fixed == FixState.ONE)]
        free = [int(i) for i in np.flatnonzero(fixed == FixState.FREE)]

    if spec.variant is Variant.REG:
        if len(free) > _BRUTE_N_CAP:
            raise SizeCapError(f"{len(free)} free variables exceeds the cap of {_BRUTE_N_CAP}")
        sizes = range(len(free) + 1)
    else:
        if len(forced) > spec.k:
            raise InfeasibleError(f"{len(forced)} variables forced in but k={spec.k}")
        k_free = spec.k - len(forced)
        sizes = range(min(k_free, len(free)) + 1)
        count = sum(math.comb(len(free), j) for j in sizes)
        if count > _BRUTE_COMB_CAP:
            raise SizeCapError(f"{count} candidate supports exceeds the cap of {_BRUTE_COMB_CAP}")

    g = inst.a.T @ inst.a
    b = inst.a.T @ inst.y
    yy = float(inst.y @ inst.y)
    mu = spec.mu if spec.variant is Variant.REG else 0.0

    best_val = math.inf
    best_support: tuple[int, ...] = ()
    near: list[tuple[tuple[int, ...], float]] = []
    for size in sizes:
        for combo in itertools.combinations(free, size):
            support = tuple(sorted(forced + list(combo)))
            val = _gram_value(g, b, yy, spec.gamma, support) + mu * len(support)
            if val < best_val:
                best_val = val
                best_support = support
            if val <= best_val + _OPT_REL_TOL * (1.0 + abs(best_val)):
                near.append((support, val))

    tol = _OPT_REL_TOL * (1.0 + abs(best_val))
    optimal = sorted(s for s, v in near if v <= best_val + tol)
    if best_support:
        x, _ = ridge_restricted_solve(inst, spec.gamma, best_support)
    else:
        x = np.zeros(n)
    if spec.variant is Variant.REG:
        obj = objective_reg(inst, spec, best_support, x)
    else:
        obj = objective_card(inst, spec, best_support, x)
    return Incumbent(support=best_support, x=x, objective=obj), optimal


def _ridge_on(inst, gamma, idx):
    """Full-length ridge refit on an index list; empty list gives zero."""
    if len(idx):
        x, value = ridge_restricted_solve(inst, gamma, idx)
    else:
        x, value = np.zeros(inst.n), float(inst.y @ inst.y)
    return x, value


def node_relaxation(
    inst: Instance,
    spec: ProblemSpec,
    fixes,
    cfg: Optional[SolverConfig] = None,
    lipschitz: Optional[float] = None,
    x_warm=None,
) -> RelaxSolution:
    """Relaxation of the subproblem where some variables are fixed.

    Fixed-out columns leave the problem entirely; fixed-in columns keep
    a plain ridge penalty (plus the selection price for reg, which is
    also inside the returned bound, so ``objective`` and
    ``lower_bound`` bracket the node's subproblem value directly).
    Raises InfeasibleError when more variables are forced in than a
    card budget allows.
    """
    cfg = cfg or SolverConfig()
    fixes = np.asarray(fixes, dtype=np.int8)
    if fixes.shape[0] != inst.n:
        raise InvalidInputError("fixes length does not match the instance")
    one_idx = np.flatnonzero(fixes == FixState.ONE)
    free_idx = np.flatnonzero(fixes == FixState.FREE)
    n_one = one_idx.size
    if spec.variant is Variant.CARD and n_one > spec.k:
        raise InfeasibleError(f"{n_one} variables forced in but k={spec.k}")

    y = inst.y
    active = np.concatenate([one_idx, free_idx]).astype(int)
    active.sort()
    free_mask = fixes[active] == FixState.FREE
    x = np.zeros(inst.n)
    z = np.zeros(inst.n)
    mu_const = spec.mu * n_one if spec.variant is Variant.REG else 0.0
    k_budget = (spec.k - n_one) if spec.variant is Variant.CARD else None

    # Nothing free to relax (or no budget left): refit the forced-in
    # set, force the rest to zero, and certify the result directly.
    if free_idx.size == 0 or (k_budget is not None and k_budget == 0):
        x, _ = _ridge_on(inst, spec.gamma, list(one_idx))
        eps = y - inst.a @ x
        z[one_idx] = 1.0
        obj = float(eps @ eps) + float(x @ x) / spec.gamma + mu_const
        ae = inst.a[:, active].T @ eps if active.size else np.zeros(0)
        if spec.variant is Variant.REG:
            lb = _bound_reg_terms(y, eps, ae, spec.gamma, spec.mu, free_mask)
        else:
            lb = _bound_card_terms(y, eps, ae, spec.gamma, k_budget or 0, free_mask)
        ok = obj - lb <= cfg.tol * (1.0 + abs(obj))
        return RelaxSolution(x=x, z=z, epsilon=eps, objective=obj, lower_bound=lb,
                             lam=None, converged=ok, iterations=0)

    a_act = inst.a[:, active]
    lip = lipschitz if lipschitz is not None else 2.0 * operator_norm_sq(a_act) * _LIPSCHITZ_PAD
    x0 = np.zeros(active.size) if x_warm is None else np.asarray(x_warm, dtype=float)[active]

    if spec.variant is Variant.REG:
        xa, eps, primal, lb, iters, ok = _berhu_solve(
            a_act, y, spec.gamma, spec.mu,
            None if n_one == 0 else free_mask,
            lip, cfg.tol, cfg.max_iter, x0,
        )
        x[active] = xa
        pen = BerhuPenalty(mu=spec.mu, gamma=spec.gamma)
        za = np.where(free_mask, np.minimum(1.0, np.abs(xa) / pen.crossover), 1.0)
        z[active] = za
        return RelaxSolution(x=x, z=z, epsilon=eps, objective=primal, lower_bound=lb,
                             lam=None, converged=ok, iterations=iters)

    out = _cc_bisection(a_act, y, spec.gamma, k_budget,
                        None if n_one == 0 else free_mask, lip, cfg)
    x[active] = out["x"]
    z[active] = out["z"]
    return RelaxSolution(x=x, z=z, epsilon=out["eps"], objective=out["objective"],
                         lower_bound=out["lower_bound"], lam=out["lam"],
                         converged=out["converged"], iterations=out["iterations"])


def _node_round(inst, spec, fixes, delta):
    """Rounded support honoring the node's fixes."""
    one_idx = np.flatnonzero(fixes == FixState.ONE)
    free_idx = np.flatnonzero(fixes == FixState.FREE)
    if spec.variant is Variant.CARD:
        room = spec.k - one_idx.size
        if room > 0 and free_idx.size:
            order = np.argsort(-delta[free_idx], kind="stable")
            picked = free_idx[order[:room]]
        else:
            picked = np.empty(0, dtype=int)
    else:
        picked = free_idx[spec.gamma * delta[free_idx] >= spec.mu]
    return sorted(int(i) for i in np.concatenate([one_idx, picked]))


def _evaluate_support(inst, spec, support):
    x, _ = _ridge_on(inst, spec.gamma, support)
    if spec.variant is Variant.REG:
        obj = objective_reg(inst, spec, support, x)
    else:
        obj = objective_card(inst, spec, support, x)
    return Incumbent(support=tuple(support), x=x, objective=obj)


def branch_and_bound(
    inst: Instance,
    spec: ProblemSpec,
    cfg: Optional[BnBConfig] = None,
    initial: Optional[Incumbent] = None,
    fixed=None,
) -> BnBStats:
    """Best-first branch and bound with certified node bounds.

    Every popped node gets a relaxation solve, a rounding pass to
    tighten the incumbent, a prune test against
    ``zeta_bar - 1e-9``, and (optionally) a screening pass; it then
    branches on one free variable.  Node counts are deterministic for a
    fixed config and instance.  ``optimal`` is True only when the
    search space was exhausted within the limits.
    """
    cfg = cfg or BnBConfig()
    t0 = time.perf_counter()
    n = inst.n
    lip = 2.0 * operator_norm_sq(inst.a) * _LIPSCHITZ_PAD
    scfg = SolverConfig(tol=_NODE_TOL, lipschitz=lip)

    root_fixes = np.full(n, FixState.FREE, dtype=np.int8)
    if fixed is not None:
        root_fixes = np.asarray(fixed, dtype=np.int8).copy()
        if root_fixes.shape[0] != n:
            raise InvalidInputError("fixed length does not match the instance")
    if spec.variant is Variant.CARD and np.count_nonzero(root_fixes == FixState.ONE) > spec.k:
        raise InfeasibleError("more variables forced in than the budget allows")

    incumbent = initial
    zeta_bar = initial.objective if initial is not None else math.inf

    counter = itertools.count()
    heap: list = [(-math.inf, next(counter), 0, root_fixes, None)]
    stack: list = []
    nodes_explored = 0
    root_fixed = 0
    hit_limit = False

    while heap or stack:
        if time.perf_counter() - t0 > cfg.time_limit_s or nodes_explored >= cfg.node_limit:
            hit_limit = True
            break
        if stack:
            bound, _, depth, fixes, warm = stack.pop()
        else:
            bound, _, depth, fixes, warm = heapq.heappop(heap)
        if bound >= zeta_bar - _PRUNE_SLACK:
            continue

        rel = node_relaxation(inst, spec, fixes, scfg, lipschitz=lip, x_warm=warm)
        nodes_explored += 1
        node_lb = max(bound, rel.lower_bound)

        delta = (inst.a.T @ rel.epsilon) ** 2
        support = _node_round(inst, spec, fixes, delta)
        cand = _evaluate_support(inst, spec, support)
        if cand.objective < zeta_bar:
            incumbent, zeta_bar = cand, cand.objective

        if node_lb >= zeta_bar - _PRUNE_SLACK:
            continue

        do_screen = (depth == 0 and cfg.screen_at_root) or cfg.screen_per_node
        if do_screen:
            free_idx = np.flatnonzero(fixes == FixState.FREE)
            if free_idx.size:
                fixes = fixes.copy()
                # the rules need the bound that belongs to this node's
                # residual, not the (possibly larger) inherited one
                cert_lb = rel.lower_bound
                if spec.variant is Variant.REG:
                    zr, on = _rules_reg(delta[free_idx], cert_lb, spec.gamma, spec.mu, zeta_bar)
                else:
                    k_budget = spec.k - int(np.count_nonzero(fixes == FixState.ONE))
                    if k_budget > 0:
                        zr, on, _, _ = _rules_card(
                            delta[free_idx], cert_lb, spec.gamma,
                            min(k_budget, free_idx.size), zeta_bar,
                        )
                    else:
                        zr = np.ones(free_idx.size, dtype=bool)
                        on = np.zeros(free_idx.size, dtype=bool)
                fixes[free_idx[zr]] = FixState.ZERO
                fixes[free_idx[on]] = FixState.ONE
                if depth == 0:
                    root_fixed = int(np.count_nonzero(zr) + np.count_nonzero(on))
                # a full budget forces the remaining free variables out
                if spec.variant is Variant.CARD:
                    if np.count_nonzero(fixes == FixState.ONE) >= spec.k:
                        fixes[fixes == FixState.FREE] = FixState.ZERO

        free_idx = np.flatnonzero(fixes == FixState.FREE)
        if free_idx.size == 0:
            support = sorted(int(i) for i in np.flatnonzero(fixes == FixState.ONE))
            cand = _evaluate_support(inst, spec, support)
            if cand.objective < zeta_bar:
                incumbent, zeta_bar = cand, cand.objective
            continue

        if cfg.branch_rule is BranchRule.LARGEST_DELTA:
            j = int(free_idx[np.argmax(delta[free_idx])])
        else:
            j = int(free_idx[np.argmin(np.abs(rel.z[free_idx] - 0.5))])

        n_one = int(np.count_nonzero(fixes == FixState.ONE))
        children = []
        if spec.variant is not Variant.CARD or n_one + 1 <= spec.k:
            child = fixes.copy()
            child[j] = FixState.ONE
            children.append(child)
        child = fixes.copy()
        child[j] = FixState.ZERO
        children.append(child)
        for ch in children:
            entry = (node_lb, next(counter), depth + 1, ch, rel.x)
            if len(heap) + len(stack) >= _OPEN_NODE_CAP:
                stack.append(entry)
            else:
                heapq.heappush(heap, entry)

    if incumbent is None:
        # limits hit before a single node was processed; fall back to the
        # smallest support the root fixes allow
        forced = sorted(int(i) for i in np.flatnonzero(root_fixes == FixState.ONE))
        incumbent = _evaluate_support(inst, spec, forced)
    return BnBStats(
        nodes_explored=nodes_explored,
        wall_time_s=time.perf_counter() - t0,
        optimal=not hit_limit,
        best=incumbent,
        root_fixed=root_fixed,
    )
