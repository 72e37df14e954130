"""Cyclic coordinate descent for l1-penalized quadratic objectives.

The canonical problem is ``-2 b'g + b'Q b + lam * ||b||_1`` with a positive
semidefinite Gram ``Q``.  Least-squares lasso corresponds to ``Q = X'X/n``,
``g = X'y/n``; likelihood-weighted VAR estimation uses an implicit Kronecker
Gram that is never materialised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000
KKT_TOL = 1e-6

_SYM_TOL = 1e-10


def soft_threshold(x, t):
    """Shrink toward zero by t; zero inside [-t, t]."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return float(out) if out.ndim == 0 else out


class DenseGram:
    """Symmetric Gram held as a Fortran-ordered array for cheap column views."""

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("gram must be square")
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        if float(np.max(np.abs(m - m.T))) > _SYM_TOL * scale:
            raise ValueError("gram must be symmetric")
        self._m = np.asfortranarray((m + m.T) / 2.0)

    @property
    def q(self) -> int:
        return self._m.shape[0]

    def diag(self) -> np.ndarray:
        return np.ascontiguousarray(np.diagonal(self._m))

    def column(self, j: int) -> np.ndarray:
        return self._m[:, j]

    def matvec(self, beta: np.ndarray) -> np.ndarray:
        return self._m @ beta

    def quad(self, beta: np.ndarray) -> float:
        return float(beta @ (self._m @ beta))

    def dense(self) -> np.ndarray:
        return self._m.copy()


class KroneckerGram:
    """Implicit ``W (x) S`` Gram; coordinate ``c*m + a`` pairs output block c
    with predictor coordinate a.  Rows, columns and the diagonal are built on
    demand so the q x q matrix never exists."""

    def __init__(self, w: np.ndarray, s: np.ndarray):
        w = np.asarray(w, dtype=float)
        s = np.asarray(s, dtype=float)
        for name, m in (("w", w), ("s", s)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square")
            scale = max(1.0, float(np.max(np.abs(m))))
            if float(np.max(np.abs(m - m.T))) > _SYM_TOL * scale:
                raise ValueError(f"{name} must be symmetric")
        self._w = np.asfortranarray((w + w.T) / 2.0)
        self._s = np.asfortranarray((s + s.T) / 2.0)
        self._m = s.shape[0]

    @property
    def q(self) -> int:
        return self._w.shape[0] * self._m

    def diag(self) -> np.ndarray:
        return np.multiply.outer(np.diagonal(self._w), np.diagonal(self._s)).ravel()

    def column(self, j: int) -> np.ndarray:
        c, a = divmod(j, self._m)
        return np.multiply.outer(self._w[:, c], self._s[:, a]).ravel()

    def matvec(self, beta: np.ndarray) -> np.ndarray:
        b = beta.reshape(self._w.shape[0], self._m).T
        return (self._s @ b @ self._w).T.ravel()

    def quad(self, beta: np.ndarray) -> float:
        return float(beta @ self.matvec(beta))


def _as_gram(gram) -> DenseGram | KroneckerGram:
    if isinstance(gram, (DenseGram, KroneckerGram)):
        return gram
    return DenseGram(np.asarray(gram, dtype=float))


@dataclass(frozen=True, eq=False)
class QuadraticL1Problem:
    """Objective ``-2 b'linear + b' gram b + lam ||b||_1``."""

    gram: object
    linear: np.ndarray
    lam: float

    def __post_init__(self) -> None:
        gram = _as_gram(self.gram)
        linear = np.asarray(self.linear, dtype=float).ravel()
        if linear.size != gram.q:
            raise ValueError(f"linear term has size {linear.size}, gram is {gram.q}")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "linear", linear)

    def objective(self, beta: np.ndarray) -> float:
        beta = np.asarray(beta, dtype=float).ravel()
        return (
            self.gram.quad(beta)
            - 2.0 * float(self.linear @ beta)
            + self.lam * float(np.sum(np.abs(beta)))
        )


@dataclass(frozen=True, eq=False)
class L1Fit:
    """Solver output with optimality certificate."""

    beta_hat: np.ndarray
    objective: float
    iterations: int
    converged: bool
    kkt_residual: float
    lam: float
    objective_trace: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        nz = np.flatnonzero(self.beta_hat)
        return {
            "size": int(self.beta_hat.size),
            "coefficients": [[int(j), float(self.beta_hat[j])] for j in nz],
            "objective": float(self.objective),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "kkt_residual": float(self.kkt_residual),
            "lambda": float(self.lam),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "L1Fit":
        beta = np.zeros(int(d["size"]))
        for j, v in d["coefficients"]:
            beta[int(j)] = float(v)
        return cls(
            beta_hat=beta,
            objective=float(d["objective"]),
            iterations=int(d["iterations"]),
            converged=bool(d["converged"]),
            kkt_residual=float(d["kkt_residual"]),
            lam=float(d["lambda"]),
        )


def kkt_residual(prob: QuadraticL1Problem, beta: np.ndarray) -> float:
    """Worst subgradient violation: ``|2(Qb - g)_j| <= lam`` on the zero set,
    ``2(Qb - g)_j + lam sign(b_j) = 0`` elsewhere."""
    beta = np.asarray(beta, dtype=float).ravel()
    grad2 = 2.0 * (prob.gram.matvec(beta) - prob.linear)
    zero = beta == 0.0
    worst = 0.0
    if np.any(zero):
        worst = float(np.max(np.maximum(np.abs(grad2[zero]) - prob.lam, 0.0)))
    if np.any(~zero):
        nz = ~zero
        worst = max(worst, float(np.max(np.abs(grad2[nz] + prob.lam * np.sign(beta[nz])))))
    return worst


def _sweep(gram, diag, linear, lam_half, beta, grad, indices) -> float:
    max_delta = 0.0
    column = gram.column
    for j in indices:
        b_j = beta[j]
        d_j = diag[j]
        g_j = linear[j] - grad[j] + d_j * b_j
        if d_j <= 0.0:
            if abs(g_j) <= lam_half:
                new = 0.0
            else:
                raise ValueError(f"gram diagonal vanishes on active coordinate {j}")
        elif g_j > lam_half:
            new = (g_j - lam_half) / d_j
        elif g_j < -lam_half:
            new = (g_j + lam_half) / d_j
        else:
            new = 0.0
        delta = new - b_j
        if delta != 0.0:
            grad += delta * column(j)
            beta[j] = new
            ad = abs(delta)
            if ad > max_delta:
                max_delta = ad
    return max_delta


def solve(
    prob: QuadraticL1Problem,
    init: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_SWEEPS,
    track_objective: bool = False,
) -> L1Fit:
    """Cyclic coordinate descent with an active-set inner loop.

    Terminates when a full sweep moves no coordinate by more than ``tol``.
    ``converged`` additionally requires the KKT residual to certify.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    gram = prob.gram
    linear = prob.linear
    q = linear.size
    beta = np.zeros(q) if init is None else np.array(init, dtype=float).ravel().copy()
    if beta.size != q:
        raise ValueError("init has wrong size")
    grad = gram.matvec(beta) if np.any(beta) else np.zeros(q)
    diag = gram.diag()
    lam_half = prob.lam / 2.0
    trace: list[float] = []
    sweeps = 0
    coordinate_converged = False
    full = range(q)
    while sweeps < max_iter:
        delta = _sweep(gram, diag, linear, lam_half, beta, grad, full)
        sweeps += 1
        if track_objective:
            trace.append(prob.objective(beta))
        if delta <= tol:
            coordinate_converged = True
            break
        while sweeps < max_iter:
            active = np.flatnonzero(beta)
            if active.size == 0:
                break
            delta = _sweep(gram, diag, linear, lam_half, beta, grad, active)
            sweeps += 1
            if track_objective:
                trace.append(prob.objective(beta))
            if delta <= tol:
                break
    kkt = kkt_residual(prob, beta)
    scale = max(1.0, float(np.max(np.abs(linear))) if q else 1.0)
    converged = coordinate_converged and kkt <= KKT_TOL * scale
    return L1Fit(
        beta_hat=beta,
        objective=prob.objective(beta),
        iterations=sweeps,
        converged=converged,
        kkt_residual=kkt,
        lam=prob.lam,
        objective_trace=tuple(trace) if track_objective else None,
    )


def lasso_regression(x: np.ndarray, y: np.ndarray, lam: float, **kwargs) -> L1Fit:
    """Lasso in M-estimation form: gram X'X/n, linear X'y/n."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError("x must be (n, p) with n matching y")
    n = x.shape[0]
    gram = x.T @ x / n
    linear = x.T @ y / n
    return solve(QuadraticL1Problem(gram=gram, linear=linear, lam=lam), **kwargs)


def threshold_estimate(fit: L1Fit | np.ndarray, level: float) -> np.ndarray:
    """Zero out coordinates with magnitude at most ``level``."""
    if level < 0:
        raise ValueError("level must be >= 0")
    beta = fit.beta_hat if isinstance(fit, L1Fit) else np.asarray(fit, dtype=float)
    out = beta.copy()
    out[np.abs(out) <= level] = 0.0
    return out


def lasso_path(x: np.ndarray, y: np.ndarray, lambdas) -> list[L1Fit]:
    """Warm-started fits along a strictly decreasing penalty grid."""
    lams = [float(v) for v in lambdas]
    if not lams:
        raise ValueError("lambdas must be nonempty")
    if any(v <= 0 for v in lams):
        raise ValueError("lambdas must be positive")
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambdas must be strictly decreasing")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = x.shape[0]
    gram = DenseGram(x.T @ x / n)
    linear = x.T @ y / n
    fits = []
    warm = None
    for lam in lams:
        fit = solve(QuadraticL1Problem(gram=gram, linear=linear, lam=lam), init=warm)
        fits.append(fit)
        warm = fit.beta_hat
    return fits


def lambda_grid(lam_max: float, points: int = 50, decades: float = 2.0) -> np.ndarray:
    """Logarithmic penalty grid from lam_max down to lam_max / 10^decades."""
    if lam_max <= 0:
        raise ValueError("lam_max must be positive")
    if points < 2:
        raise ValueError("points must be >= 2")
    return lam_max * np.logspace(0.0, -decades, points)


@dataclass(frozen=True)
class LambdaRule:
    """Rate-driven penalty ``c * sqrt(log(p_eff) / n)``."""

    constant: float
    n: int
    p_eff: int

    def __post_init__(self) -> None:
        if self.constant <= 0:
            raise ValueError("constant must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.p_eff < 2:
            raise ValueError("p_eff must be >= 2")

    @property
    def value(self) -> float:
        return self.constant * math.sqrt(math.log(self.p_eff) / self.n)
