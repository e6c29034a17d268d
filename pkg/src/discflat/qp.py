"""Equality-constrained convex QP via a symmetric-indefinite KKT factorization.

Solves ``min 0.5 y'Hy + g'y  s.t.  Ay = b``. The KKT matrix
``[[H, A'], [A, 0]]`` is factored with LAPACK's Bunch-Kaufman ``dsytrf``;
:class:`KKTFactorization` keeps the factors so a controller whose ``H`` and
``A`` never change can re-solve for new ``g`` and ``b`` with two triangular
sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import QPError

OPTIMAL = "optimal"
RANK_DEFICIENT = "rank-deficient"
NUMERICAL_FAILURE = "numerical-failure"

PIVOT_RTOL = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass
class EqQP:
    H: np.ndarray
    g: np.ndarray
    A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        n = self.H.shape[0]
        self.g = np.asarray(self.g, dtype=float).reshape(n)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).reshape(self.A.shape[0])
        if self.H.shape != (n, n):
            raise ValueError("H must be square")
        if np.max(np.abs(self.H - self.H.T), initial=0.0) > SYMMETRY_TOL * max(
            1.0, np.max(np.abs(self.H), initial=0.0)
        ):
            raise ValueError("H must be symmetric")
        if self.A.shape[0] > n:
            raise ValueError("more constraints than variables")

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass
class QPSolution:
    y: np.ndarray
    multipliers: np.ndarray
    status: str = OPTIMAL

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    def raise_for_status(self) -> QPSolution:
        if not self.ok:
            raise QPError(self.status, f"QP solve failed: {self.status}")
        return self


def _min_pivot(lu: np.ndarray, ipiv: np.ndarray) -> float:
    """Smallest pivot magnitude of a dsytrf (lower) factorization.

    2x2 blocks contribute their smallest singular value.
    """
    dim = lu.shape[0]
    smallest = np.inf
    i = 0
    while i < dim:
        if ipiv[i] > 0:
            smallest = min(smallest, abs(lu[i, i]))
            i += 1
        else:
            block = np.array([[lu[i, i], lu[i + 1, i]], [lu[i + 1, i], lu[i + 1, i + 1]]])
            smallest = min(smallest, np.linalg.svd(block, compute_uv=False)[-1])
            i += 2
    return smallest


def _rank_deficient(A: np.ndarray) -> bool:
    if A.shape[0] == 0:
        return False
    sv = np.linalg.svd(A, compute_uv=False)
    return sv[-1] <= PIVOT_RTOL * max(A.shape) * max(sv[0], 1.0)


class KKTFactorization:
    """Reusable factorization of the KKT matrix for fixed ``H`` and ``A``.

    Before factoring, the objective is divided by ``||H||_inf`` and each
    constraint row by its own inf-norm. Neither changes the minimizer, and
    together they keep the constraint Schur pivots from vanishing relative
    to a large Hessian. Multipliers are mapped back to the unscaled problem.
    """

    def __init__(self, H, A=None):
        H = np.asarray(H, dtype=float)
        n = H.shape[0]
        A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
        self.n, self.m = n, A.shape[0]
        self.status = OPTIMAL
        if _rank_deficient(A):
            self.status = RANK_DEFICIENT
            return
        self._cost_scale = np.max(np.sum(np.abs(H), axis=1), initial=0.0) or 1.0
        self._row_scale = 1.0 / np.max(np.abs(A), axis=1, initial=0.0) if self.m else np.ones(0)
        As = self._row_scale[:, None] * A
        K = np.zeros((n + self.m, n + self.m))
        K[:n, :n] = H / self._cost_scale
        K[n:, :n] = As
        K[:n, n:] = As.T
        lu, ipiv, info = lapack.dsytrf(K, lower=1)
        scale = np.max(np.sum(np.abs(K), axis=1), initial=0.0)
        if info != 0 or _min_pivot(lu, ipiv) < PIVOT_RTOL * scale:
            self.status = NUMERICAL_FAILURE
            return
        self._lu, self._ipiv = lu, ipiv

    def solve(self, g, b=None) -> QPSolution:
        if self.status != OPTIMAL:
            return QPSolution(np.full(self.n, np.nan), np.full(self.m, np.nan), self.status)
        rhs = np.empty(self.n + self.m)
        rhs[: self.n] = -np.asarray(g, dtype=float) / self._cost_scale
        rhs[self.n:] = 0.0 if b is None else self._row_scale * np.asarray(b, dtype=float)
        x, info = lapack.dsytrs(self._lu, self._ipiv, rhs, lower=1)
        if info != 0 or not np.all(np.isfinite(x)):
            return QPSolution(np.full(self.n, np.nan), np.full(self.m, np.nan), NUMERICAL_FAILURE)
        lam = self._cost_scale * self._row_scale * x[self.n:]
        return QPSolution(x[: self.n], lam, OPTIMAL)


def solve_eq_qp(problem: EqQP) -> QPSolution:
    """Solve an equality-constrained QP.

    Multipliers follow ``H y + g + A' lam = 0``. Failure is reported via
    ``status`` (``"rank-deficient"`` or ``"numerical-failure"``), not raised.
    """
    return KKTFactorization(problem.H, problem.A).solve(problem.g, problem.b)
