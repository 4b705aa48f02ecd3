"""Problem data model: instances, problem variants, objectives.

Two subset-selection problems over the same least-squares data are
supported.  Both penalize coefficients with a ridge term scaled by
1/gamma; the "reg" variant charges a fixed price mu per selected
variable while the "card" variant caps the number of selected
variables at k.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Optional

import numpy as np
from numpy.typing import NDArray


class InvalidInputError(ValueError):
    """An argument violates an operation's contract."""


class ConstraintViolationError(ValueError):
    """A candidate solution violates the problem constraints."""


class InconsistentBoundsError(ValueError):
    """An upper bound fell below a certified lower bound."""


class SizeCapError(ValueError):
    """An exhaustive computation would exceed its size cap."""


class InfeasibleError(ValueError):
    """Fixed variables make a subproblem infeasible."""


class CsvParseError(ValueError):
    """CSV ingestion failure; carries a 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Variant(str, Enum):
    REG = "reg"
    CARD = "card"


class FixState(IntEnum):
    """Per-variable decision state used by screening and branch and bound."""

    FREE = 0
    ZERO = 1
    ONE = 2


@dataclass(frozen=True)
class Instance:
    """Immutable regression data: model matrix ``a`` (m x n) and response ``y`` (m,).

    Arrays are copied, stored column-major (columns are sliced far more
    often than rows), and marked read-only.
    """

    a: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        a = np.array(self.a, dtype=float, order="F", copy=True)
        y = np.array(self.y, dtype=float, copy=True).ravel()
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise InvalidInputError("model matrix must be 2-D with at least one row and one column")
        if y.shape[0] != a.shape[0]:
            raise InvalidInputError(
                f"response has {y.shape[0]} entries but the matrix has {a.shape[0]} rows"
            )
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(y)):
            raise InvalidInputError("matrix and response entries must be finite")
        a.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class ProblemSpec:
    """Which variant is being solved, and its parameters.

    ``mu`` is set for the per-variable-priced variant, ``k`` for the
    cardinality-capped variant; exactly one of them is present.
    """

    variant: Variant
    gamma: float
    mu: Optional[float] = None
    k: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidInputError("gamma must be positive and finite")
        if self.variant is Variant.REG:
            if self.mu is None or not np.isfinite(self.mu) or self.mu <= 0:
                raise InvalidInputError("reg variant needs mu > 0")
            if self.k is not None:
                raise InvalidInputError("reg variant takes no k")
        else:
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise InvalidInputError("card variant needs integer k >= 1")
            if self.mu is not None:
                raise InvalidInputError("card variant takes no mu")
            object.__setattr__(self, "k", int(self.k))

    @classmethod
    def reg(cls, gamma: float, mu: float) -> "ProblemSpec":
        return cls(variant=Variant.REG, gamma=gamma, mu=mu)

    @classmethod
    def card(cls, gamma: float, k: int) -> "ProblemSpec":
        return cls(variant=Variant.CARD, gamma=gamma, k=k)


@dataclass(frozen=True)
class Incumbent:
    """A feasible solution: its support, full-length coefficients, and objective."""

    support: tuple[int, ...]
    x: NDArray[np.float64]
    objective: float


def _check_support(support: Iterable[int], n: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(i) for i in support)), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise InvalidInputError(f"support indices must lie in [0, {n})")
    return idx

def _check_x(x, n: int, support: Optional[np.ndarray] = None) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != n:
        raise InvalidInputError(f"x has length {x.shape[0]}, expected {n}")
    if support is not None:
        off = np.ones(n, dtype=bool)
        off[support] = False
        if np.any(x[off] != 0.0):
            raise InvalidInputError("x must be zero off the support")
    return x


def objective_reg(inst: Instance, spec: ProblemSpec, support: Iterable[int], x) -> float:
    """Least-squares loss + ridge on the support + mu per selected variable.

    ``x`` must be zero off the support.
    """
    if spec.variant is not Variant.REG:
        raise InvalidInputError("objective_reg needs a reg spec")
    idx = _check_support(support, inst.n)
    x = _check_x(x, inst.n, idx)
    r = inst.y - inst.a[:, idx] @ x[idx]
    return float(r @ r + (x[idx] @ x[idx]) / spec.gamma + spec.mu * idx.size)


def objective_card(inst: Instance, spec: ProblemSpec, support: Iterable[int], x) -> float:
    """Least-squares loss + ridge on the support, support size capped at k."""
    if spec.variant is not Variant.CARD:
        raise InvalidInputError("objective_card needs a card spec")
    idx = _check_support(support, inst.n)
    if idx.size > spec.k:
        raise ConstraintViolationError(f"support size {idx.size} exceeds k={spec.k}")
    x = _check_x(x, inst.n, idx)
    r = inst.y - inst.a[:, idx] @ x[idx]
    return float(r @ r + (x[idx] @ x[idx]) / spec.gamma)


def ridge_restricted_solve(inst: Instance, gamma: float, support: Iterable[int]):
    """Minimize the loss plus ridge over coefficients supported on ``support``.

    Returns ``(x, value)`` where ``x`` is full length (zero off the
    support) and ``value`` excludes any selection cost.  The normal
    equations are symmetric positive definite for any gamma > 0.
    """
    if gamma <= 0 or not np.isfinite(gamma):
        raise InvalidInputError("gamma must be positive and finite")
    idx = _check_support(support, inst.n)
    if idx.size == 0:
        raise InvalidInputError("support must be non-empty")
    a_s = inst.a[:, idx]
    g = a_s.T @ a_s + np.eye(idx.size) / gamma
    x_s = np.linalg.solve(g, a_s.T @ inst.y)
    x = np.zeros(inst.n)
    x[idx] = x_s
    r = inst.y - a_s @ x_s
    value = float(r @ r + (x_s @ x_s) / gamma)
    return x, value


def delta_vector(inst: Instance, x_star):
    """Residual and per-column squared residual correlations for a primal point.

    Returns ``(epsilon, delta)`` with ``epsilon = y - A x_star`` and
    ``delta_i = (a_i' epsilon)^2``.  These scores drive every screening
    rule and rounding heuristic downstream.
    """
    x_star = _check_x(x_star, inst.n)
    eps = inst.y - inst.a @ x_star
    delta = (inst.a.T @ eps) ** 2
    return eps, delta
