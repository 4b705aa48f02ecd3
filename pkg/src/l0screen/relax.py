"""Convex relaxation solvers with certified dual lower bounds.

Relaxing the binary selection indicators to [0, 1] and minimizing each
perspective term ``x_i^2 / (gamma z_i) + mu z_i`` in ``z_i`` leaves a
separable reverse-Huber (Berhu) penalty on each coefficient: linear
near the origin, quadratic past ``sqrt(gamma * mu)``.  The relaxations
are solved by an accelerated proximal gradient method with adaptive
restart.  Every residual ``eps = y - A x`` yields a dual-feasible point
and hence a certified lower bound, valid whether or not the iteration
has converged; termination is decided by the certified gap itself.

The cardinality-capped relaxation is solved through its Lagrangian: the
budget constraint is priced at a level ``lam >= 0`` found by bisection,
each inner problem being a Berhu problem with ``mu = lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .problem import Instance, InvalidInputError

# Power iteration approaches the top singular value from below; pad the
# Lipschitz estimate so the fixed step stays valid.
_LIPSCHITZ_PAD = 1.01

# Bisection stops when the bracket is this narrow (relative).
_BRACKET_TOL = 1e-10


@dataclass(frozen=True)
class BerhuPenalty:
    """Reverse-Huber penalty, the exact envelope of the perspective term.

    value(x) = 2 |x| sqrt(mu / gamma)      if |x| <= sqrt(gamma mu)
             = x^2 / gamma + mu            otherwise

    The minimizing indicator is ``z = min(1, |x| / sqrt(gamma mu))``.
    """

    mu: float
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0 or not np.isfinite(self.gamma):
            raise InvalidInputError("gamma must be positive and finite")
        if self.mu < 0 or not np.isfinite(self.mu):
            raise InvalidInputError("mu must be non-negative and finite")

    @property
    def crossover(self) -> float:
        """|x| at which the linear and quadratic branches meet."""
        return math.sqrt(self.gamma * self.mu)

    @property
    def slope(self) -> float:
        """Slope of the linear branch."""
        return 2.0 * math.sqrt(self.mu / self.gamma)


def berhu_value(pen: BerhuPenalty, x):
    """Penalty value, elementwise over ``x``."""
    xv = np.asarray(x, dtype=float)
    ax = np.abs(xv)
    out = np.where(ax <= pen.crossover, pen.slope * ax, ax * ax / pen.gamma + pen.mu)
    return float(out) if xv.ndim == 0 else out

def berhu_prox(pen: BerhuPenalty, t, v):
    """Proximal map of ``t * value``: soft threshold, then ridge shrink.

    For |v| below ``t * slope`` the result is 0; up to the (shifted)
    crossover the linear branch soft-thresholds; past it the quadratic
    branch scales by 1 / (1 + 2 t / gamma).  The two pieces meet exactly
    at ``crossover * (1 + 2 t / gamma)``, so the map is continuous and
    monotone.
    """
    if t <= 0 or not np.isfinite(t):
        raise InvalidInputError("step t must be positive and finite")
    vv = np.asarray(v, dtype=float)
    av = np.abs(vv)
    thr = t * pen.slope
    scale = 1.0 + 2.0 * t / pen.gamma
    out = np.where(
        av <= thr,
        0.0,
        np.where(av <= pen.crossover * scale, av - thr, av / scale),
    ) * np.sign(vv)
    return float(out) if vv.ndim == 0 else out


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 50_000
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if not (0 < self.tol < 1):
            raise InvalidInputError("tol must lie in (0, 1)")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be >= 1")
        if self.lipschitz is not None and self.lipschitz <= 0:
            raise InvalidInputError("lipschitz must be positive when given")


@dataclass
class RelaxSolution:
    """Relaxation output: primal point, recovered indicators, certificate."""

    x: NDArray[np.float64]
    z: NDArray[np.float64]
    epsilon: NDArray[np.float64]
    objective: float
    lower_bound: float
    lam: Optional[float] = None
    converged: bool = True
    iterations: int = 0

    @property
    def gap(self) -> float:
        return (self.objective - self.lower_bound) / (1.0 + abs(self.objective))


@dataclass(frozen=True)
class DualCertificate:
    epsilon_bar: NDArray[np.float64]
    lower_bound: float


def operator_norm_sq(a, iters: int = 100, tol: float = 1e-10) -> float:
    """Largest squared singular value by power iteration, deterministic start."""
    a = np.asarray(a, dtype=float)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    v /= nv
    lam = 0.0
    for _ in range(iters):
        w = a.T @ (a @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def dual_from_primal(gamma: float, inst: Instance, epsilon_bar) -> np.ndarray:
    """Dual point recovered from a residual: ``p = 2 gamma A' epsilon_bar``."""
    eps = _check_residual(inst, epsilon_bar)
    return 2.0 * gamma * (inst.a.T @ eps)


def _check_residual(inst: Instance, epsilon_bar) -> np.ndarray:
    eps = np.asarray(epsilon_bar, dtype=float).ravel()
    if eps.shape[0] != inst.m:
        raise InvalidInputError(f"residual has length {eps.shape[0]}, expected {inst.m}")
    return eps


def _bound_reg_terms(y, eps, ateps, gamma, mu, free_mask=None) -> float:
    # Dual value at p = 2 gamma A'eps: the x-part is 2 eps'y - ||eps||^2
    # for any eps, the z-part clips each margin mu - gamma delta_i at 0
    # for free variables and takes it as-is for variables fixed in.
    d = ateps * ateps
    margin = mu - gamma * d
    if free_mask is None:
        zpart = float(np.minimum(0.0, margin).sum())
    else:
        zpart = float(np.minimum(0.0, margin[free_mask]).sum() + margin[~free_mask].sum())
    return float(2.0 * (eps @ y) - eps @ eps + zpart)


def _bound_card_terms(y, eps, ateps, gamma, k_budget, free_mask=None) -> float:
    # z-part: variables fixed in contribute -gamma delta_i outright; the
    # budget then buys the k largest scores among the free variables.
    d = ateps * ateps
    if free_mask is None:
        df = d
        fixed = 0.0
    else:
        df = d[free_mask]
        fixed = float(d[~free_mask].sum())
    kk = min(int(k_budget), df.size)
    top = float(np.partition(df, df.size - kk)[df.size - kk:].sum()) if kk > 0 else 0.0
    return float(2.0 * (eps @ y) - eps @ eps - gamma * (fixed + top))


def certified_lower_bound_reg(inst: Instance, gamma: float, mu: float, epsilon_bar) -> float:
    """Certified lower bound on the reg relaxation, valid for any residual."""
    if gamma <= 0 or mu <= 0:
        raise InvalidInputError("gamma and mu must be positive")
    eps = _check_residual(inst, epsilon_bar)
    return _bound_reg_terms(inst.y, eps, inst.a.T @ eps, gamma, mu)


def certified_lower_bound_card(inst: Instance, gamma: float, k: int, epsilon_bar) -> float:
    """Certified lower bound on the card relaxation, valid for any residual."""
    if gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    if not (1 <= int(k) <= inst.n) or int(k) != k:
        raise InvalidInputError(f"k must be an integer in [1, {inst.n}]")
    eps = _check_residual(inst, epsilon_bar)
    return _bound_card_terms(inst.y, eps, inst.a.T @ eps, gamma, int(k))


def _accel_prox_solve(a, y, prox, penalty_value, certificate, lipschitz, tol, max_iter, x0):
    """Accelerated proximal gradient with gradient-based restart.

    Minimizes ``||y - a x||^2 + sum_i psi_i(x_i)`` where the separable
    part enters through ``prox``/``penalty_value``.  Terminates when the
    certified relative gap drops below ``tol``.  Returns
    ``(x, eps, primal, lower_bound, iterations, converged)``.
    """
    lip = float(lipschitz)
    if lip <= 0.0:
        lip = 1.0  # gradient is then zero or the prox does all the work
    step = 1.0 / lip
    x = np.array(x0, dtype=float)
    v = x.copy()
    t_mom = 1.0
    check_every = 1 if a.size <= 20_000 else 10
    it = 0
    while True:
        eps = y - a @ x
        primal = float(eps @ eps) + penalty_value(x)
        lb = certificate(eps, a.T @ eps)
        ok = primal - lb <= tol * (1.0 + abs(primal))
        if ok or it >= max_iter:
            return x, eps, primal, lb, it, ok
        stop = min(max_iter, it + check_every)
        while it < stop:
            grad = 2.0 * (a.T @ (a @ v - y))
            x_new = prox(v - step * grad, step)
            if float((v - x_new) @ (x_new - x)) > 0.0:
                t_mom = 1.0
                v = x_new.copy()
            else:
                t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
                v = x_new + ((t_mom - 1.0) / t_next) * (x_new - x)
                t_mom = t_next
            x = x_new
            it += 1


def _auto_lipschitz(a, cfg: SolverConfig) -> float:
    if cfg.lipschitz is not None:
        return cfg.lipschitz
    return 2.0 * operator_norm_sq(a) * _LIPSCHITZ_PAD


def _berhu_solve(a, y, gamma, mu, free_mask, lip, tol, max_iter, x0):
    """One Berhu problem; columns outside ``free_mask`` get a plain ridge.

    The reported primal and bound include the flat charge ``mu`` per
    fixed-in column, so the pair brackets the subproblem value directly.
    """
    pen = BerhuPenalty(mu=mu, gamma=gamma)
    n_one = 0 if free_mask is None else int(np.count_nonzero(~free_mask))

    if free_mask is None:
        prox = lambda w, s: berhu_prox(pen, s, w)
        penval = lambda xv: float(np.sum(berhu_value(pen, xv)))
    else:
        fm = free_mask
        om = ~free_mask

        def prox(w, s):
            out = np.empty_like(w)
            out[fm] = berhu_prox(pen, s, w[fm])
            out[om] = w[om] / (1.0 + 2.0 * s / gamma)
            return out

        def penval(xv):
            xo = xv[om]
            return float(np.sum(berhu_value(pen, xv[fm])) + (xo @ xo) / gamma) + mu * n_one

    cert = lambda e, ae: _bound_reg_terms(y, e, ae, gamma, mu, free_mask)
    return _accel_prox_solve(a, y, prox, penval, cert, lip, tol, max_iter, x0)


def solve_cr(inst: Instance, gamma: float, mu: float, cfg: Optional[SolverConfig] = None) -> RelaxSolution:
    """Solve the reg relaxation to a certified relative gap of ``cfg.tol``.

    Parameters
    ----------
    inst : Instance
    gamma, mu : float
        Ridge scale and per-variable price, both positive.
    cfg : SolverConfig, optional

    Returns
    -------
    RelaxSolution
        ``objective`` is the primal value of the final iterate,
        ``lower_bound`` the certificate of its residual, and
        ``z = min(1, |x| / sqrt(gamma mu))``.  If the gap did not close
        within ``max_iter`` the best iterate is returned with
        ``converged=False``; the bound is still valid.
    """
    cfg = cfg or SolverConfig()
    if gamma <= 0 or not np.isfinite(gamma):
        raise InvalidInputError("gamma must be positive and finite")
    if mu <= 0 or not np.isfinite(mu):
        raise InvalidInputError("mu must be positive and finite")
    a, y = inst.a, inst.y
    lip = _auto_lipschitz(a, cfg)
    x, eps, primal, lb, iters, ok = _berhu_solve(
        a, y, gamma, mu, None, lip, cfg.tol, cfg.max_iter, np.zeros(inst.n)
    )
    pen = BerhuPenalty(mu=mu, gamma=gamma)
    z = np.minimum(1.0, np.abs(x) / pen.crossover)
    return RelaxSolution(
        x=x, z=z, epsilon=eps, objective=primal, lower_bound=lb,
        lam=None, converged=ok, iterations=iters,
    )


def _ridge_full(a, y, gamma):
    """Unrestricted ridge solution via whichever normal system is smaller."""
    m, n = a.shape
    if n <= m:
        return np.linalg.solve(a.T @ a + np.eye(n) / gamma, a.T @ y)
    u = np.linalg.solve(a @ a.T + np.eye(m) / gamma, y)
    return a.T @ u


def _cc_bisection(a, y, gamma, k_budget, free_mask, lip, cfg: SolverConfig):
    """Budget-capped relaxation over the free columns; fixed-in columns get ridge.

    Prices the budget at ``lam`` and bisects on the indicator mass
    ``n(lam) = sum_free min(1, |x_i| / sqrt(gamma lam))``, which is
    non-increasing in ``lam``.  Returns a dict with the feasible-side
    iterate, its certificate, and the final price.
    """
    m, n_act = a.shape
    free = np.ones(n_act, dtype=bool) if free_mask is None else free_mask
    tol = cfg.tol

    def card_cert(eps, ateps):
        return _bound_card_terms(y, eps, ateps, gamma, k_budget, free_mask)

    def cc_objective(x, z_free, eps):
        xo = x[~free]
        xf = x[free]
        val = float(eps @ eps) + float(xo @ xo) / gamma
        nz = z_free > 0.0
        val += float((xf[nz] * xf[nz] / z_free[nz]).sum()) / gamma
        return val

    def feasible_z(x, lam):
        """Indicator block scaled onto the budget so the value is primal-valid."""
        if lam > 0.0:
            z_free = np.minimum(1.0, np.abs(x[free]) / math.sqrt(gamma * lam))
        else:
            z_free = (x[free] != 0.0).astype(float)
        mass = float(z_free.sum())
        if mass > k_budget:
            z_free = z_free * (k_budget / mass)
        return z_free

    def pack(x, z_free, eps, lam, iters, converged):
        obj = cc_objective(x, z_free, eps)
        lb = card_cert(eps, a.T @ eps)
        z = np.empty(n_act)
        z[free] = z_free
        z[~free] = 1.0
        return {
            "x": x, "z": z, "eps": eps, "objective": obj, "lower_bound": lb,
            "lam": lam, "iterations": iters, "converged": converged,
        }

    # lam = 0: a plain ridge over all active columns. If its free part
    # already fits the budget, the cap is slack and we are done.
    x_r = _ridge_full(a, y, gamma)
    if np.count_nonzero(x_r[free]) <= k_budget:
        eps = y - a @ x_r
        z_free = (x_r[free] != 0.0).astype(float)
        out = pack(x_r, z_free, eps, 0.0, 0, True)
        out["converged"] = out["objective"] - out["lower_bound"] <= tol * (1.0 + abs(out["objective"]))
        return out

    def inner(lam, x0, inner_tol, max_iter):
        return _berhu_solve(a, y, gamma, lam, free_mask, lip, inner_tol, max_iter, x0)

    def indicator_mass(x, lam):
        return float(np.minimum(1.0, np.abs(x[free]) / math.sqrt(gamma * lam)).sum())

    d0 = (a.T @ y) ** 2
    lam_hi = gamma * float(d0[free].max()) + 1.0
    lam_lo = 0.0
    x_warm = np.zeros(n_act)
    total_iters = 0
    best = None
    best_cert = (None, -math.inf)  # (eps, bound): kept as a consistent pair

    def absorb(x, eps, lam):
        """Fold one iterate into the running primal/dual best."""
        nonlocal best, best_cert
        cand = pack(x, feasible_z(x, lam), eps, lam, 0, True)
        if best is None or cand["objective"] < best["objective"]:
            best = cand
        if cand["lower_bound"] > best_cert[1]:
            best_cert = (eps, cand["lower_bound"])
        return best["objective"] - best_cert[1] <= tol * (1.0 + abs(best["objective"]))

    # Make sure the upper end of the bracket really is on the feasible
    # side; with fixed-in columns the closed-form start is only a guess.
    for _ in range(60):
        x_hi, eps_hi, _, _, its, _ = inner(lam_hi, x_warm, tol, cfg.max_iter)
        total_iters += its
        x_warm = x_hi
        done = absorb(x_hi, eps_hi, lam_hi)
        if indicator_mass(x_hi, lam_hi) <= k_budget:
            break
        lam_lo = lam_hi
        lam_hi *= 2.0

    for _ in range(200):
        if done:
            break
        lam = 0.5 * (lam_lo + lam_hi)
        x_l, eps_l, _, _, its, _ = inner(lam, x_warm, tol, cfg.max_iter)
        total_iters += its
        x_warm = x_l
        done = absorb(x_l, eps_l, lam)
        if indicator_mass(x_l, lam) <= k_budget:
            lam_hi = lam
        else:
            lam_lo = lam
        if lam_hi - lam_lo <= _BRACKET_TOL * (1.0 + lam_hi):
            break

    if not done:
        # Bracket collapsed before the gap closed: polish once at the
        # feasible end with a tighter inner solve.
        x_p, eps_p, _, _, its, _ = inner(lam_hi, x_warm, tol * 1e-2, 2 * cfg.max_iter)
        total_iters += its
        done = absorb(x_p, eps_p, lam_hi)

    best["eps"] = best_cert[0]
    best["lower_bound"] = best_cert[1]
    best["converged"] = done
    best["iterations"] = total_iters
    return best


def solve_cc(inst: Instance, gamma: float, k: int, cfg: Optional[SolverConfig] = None) -> RelaxSolution:
    """Solve the card relaxation to a certified relative gap of ``cfg.tol``.

    The budget constraint is priced by bisection on its multiplier.  A
    zero price (plain ridge with few enough nonzeros) is detected first;
    otherwise the bracket shrinks until either the certified gap closes
    or the bracket width falls below 1e-10 relative, after which one
    tighter polish solve is attempted.  ``lam`` reports the final price,
    ``z`` comes from the final iterate, and feasibility holds up to
    ``sum(z) <= k + 1e-6``.
    """
    cfg = cfg or SolverConfig()
    if gamma <= 0 or not np.isfinite(gamma):
        raise InvalidInputError("gamma must be positive and finite")
    if not (1 <= int(k) <= inst.n) or int(k) != k:
        raise InvalidInputError(f"k must be an integer in [1, {inst.n}]")
    a, y = inst.a, inst.y
    lip = _auto_lipschitz(a, cfg)
    out = _cc_bisection(a, y, gamma, int(k), None, lip, cfg)
    return RelaxSolution(
        x=out["x"], z=out["z"], epsilon=out["eps"], objective=out["objective"],
        lower_bound=out["lower_bound"], lam=out["lam"], converged=out["converged"],
        iterations=out["iterations"],
    )
