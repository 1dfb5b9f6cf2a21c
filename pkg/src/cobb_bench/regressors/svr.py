"""Linear epsilon-insensitive support vector regression, solved in the dual.

Primal::

    min_{w,b}  1/2 ||w||^2 + C * sum_i max(0, |y_i - w.x_i - b| - epsilon)

Dual in the signed variables ``beta_i = alpha_i - alpha*_i``::

    min_beta  1/2 beta' K beta - y' beta + epsilon * sum_i |beta_i|
    s.t.      sum_i beta_i = 0,   -C <= beta_i <= C

with ``K = X X'``.  The equality constraint (from the free intercept) rules out
moving one coordinate alone, so each step moves a pair ``(beta_i + t,
beta_j - t)``.  The one-dimensional problem in ``t`` is a convex piecewise
quadratic; its exact minimiser is found among the box ends, the two kinks and
the three stationary points of the quadratic pieces.  With ``up_i`` /
``down_i`` the one-sided partial derivatives of the dual for raising /
lowering ``beta_i``, each pair step takes the pair ``i != j`` maximising the
KKT violation ``down_j - up_i`` and the solver stops once that violation is
below ``tol``.

Gait features are close to collinear, which makes ``K`` badly conditioned and
plain pair steps crawl.  Between pair steps the solver therefore takes
active-set steps: with every coordinate's sign / bound state held, the dual is
a quadratic on that face, and the step walks towards its minimiser (or along
a zero-curvature descent ray when the face is singular) until a coordinate
hits zero or the box.  Every step lowers the dual, and pair steps release
coordinates from the face.  A final KKT polish on the active pattern is kept
only if it lowers the primal objective.
"""

from __future__ import annotations

import warnings

import numpy as np

from .base import ConvergenceWarning
from .linear import _check_xy


def svr_primal_objective(w, b, X, y, C: float, epsilon: float) -> float:
    r = np.asarray(y, dtype=float) - np.asarray(X, dtype=float) @ np.asarray(w, dtype=float) - b
    return float(0.5 * np.dot(w, w) + C * np.sum(np.maximum(0.0, np.abs(r) - epsilon)))


def best_intercept(r: np.ndarray, epsilon: float) -> float:
    """Midpoint of the interval of ``b`` minimising ``sum max(0, |r_i - b| - epsilon)``."""
    cands = np.concatenate([r - epsilon, r + epsilon])
    loss = np.maximum(0.0, np.abs(r[None, :] - cands[:, None]) - epsilon).sum(axis=1)
    best = loss.min()
    at_min = cands[loss <= best + 1e-12 * max(1.0, best)]
    return float(0.5 * (at_min.min() + at_min.max()))


def _pair_step(bi, bj, gi, gj, eta, C, epsilon) -> float:
    """Exact minimiser ``t`` of the dual along ``beta_i += t, beta_j -= t``."""
    lo = max(-C - bi, bj - C)
    hi = min(C - bi, bj + C)
    dg = gi - gj

    def delta(t):
        return 0.5 * eta * t * t + t * dg + epsilon * (abs(bi + t) - abs(bi) + abs(bj - t) - abs(bj))

    cands = [lo, hi, min(max(-bi, lo), hi), min(max(bj, lo), hi)]
    if eta > 0:
        for s in (-2.0, 0.0, 2.0):
            cands.append(min(max(-(dg + epsilon * s) / eta, lo), hi))
    best_t, best_d = 0.0, 0.0
    for t in cands:
        d = delta(t)
        if d < best_d:
            best_t, best_d = t, d
    return best_t


def _polish(beta, X, y, C, epsilon):
    """Solve the KKT system for the active pattern of ``beta``; ``None`` if infeasible."""
    atol = 1e-8 * C
    mag = np.abs(beta)
    free = (mag > atol) & (mag < C - atol)
    bound = mag >= C - atol
    if not free.any():
        return None
    sign = np.sign(beta)
    fixed = np.where(bound, sign * C, 0.0)
    K = X @ X.T
    F = np.flatnonzero(free)
    k = F.size
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = K[np.ix_(F, F)]
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    rhs = np.concatenate([y[F] - epsilon * sign[F] - K[F] @ fixed, [-fixed.sum()]])
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    beta_f = sol[:k]
    if np.any(np.sign(beta_f) != sign[F]) or np.any(np.abs(beta_f) > C):
        return None
    out = fixed.copy()
    out[F] = beta_f
    return out, float(sol[k])


def _face_step(beta, g, K, C, epsilon):
    """One active-set step on the face of ``beta``'s current sign/bound pattern.

    Minimises the dual over the free coordinates (same signs, ``sum = 0``
    kept) and walks towards that minimiser until a free coordinate reaches 0
    or the box.  On a singular face with no minimiser it follows a descent
    ray of zero curvature instead.  Returns ``(point, reached)`` with
    ``reached`` true when the face minimiser itself was reached, or ``None``
    when ``beta`` already minimises its face.
    """
    mag = np.abs(beta)
    F = np.flatnonzero((mag > 0.0) & (mag < C))
    if F.size == 0:
        return None
    sign = np.sign(beta[F])
    q = g[F] + epsilon * sign
    k = F.size
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = K[np.ix_(F, F)]
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    rhs = np.concatenate([-q, [0.0]])
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    scale = max(1.0, float(np.abs(q).max()), float(np.abs(A).max()))
    if np.abs(A @ sol - rhs).max() <= 1e-9 * scale:
        p, limit = sol[:k], 1.0
    else:
        _, sv, vt = np.linalg.svd(A[:, :k])
        null = vt[int(np.sum(sv > 1e-10 * sv[0])):]
        p, limit = -(null.T @ (null @ q)), np.inf
    if np.abs(p).max() <= 1e-14 * max(1.0, float(mag[F].max())):
        return None
    # Largest step keeping every free coordinate within [0, C] in magnitude.
    with np.errstate(divide="ignore", invalid="ignore"):
        toward = p * sign
        to_zero = np.where(toward < 0, mag[F] / -toward, np.inf)
        to_box = np.where(toward > 0, (C - mag[F]) / toward, np.inf)
    stops = np.minimum(to_zero, to_box)
    step = min(limit, float(stops.min()))
    if not np.isfinite(step) or step <= 0.0:
        return None
    out = beta.copy()
    out[F] = beta[F] + step * p
    if step < limit:
        h = int(np.argmin(stops))
        out[F[h]] = 0.0 if to_zero[h] <= to_box[h] else sign[h] * C
        # the snapped coordinate moved by a rounding amount; rebalance the sum
        out[F[np.argmax(np.where(np.arange(k) == h, -1, mag[F]))]] -= out.sum()
    return out, step >= limit


def _dual(beta, K, y, epsilon) -> float:
    return float(0.5 * beta @ K @ beta - y @ beta + epsilon * np.abs(beta).sum())


def _one_sided_derivatives(beta, g, C, epsilon):
    up = np.where(beta >= 0, g + epsilon, g - epsilon)
    up = np.where(beta >= C, np.inf, up)
    down = np.where(beta <= 0, g - epsilon, g + epsilon)
    down = np.where(beta <= -C, -np.inf, down)
    return up, down


def _most_violating_pair(beta, g, C, epsilon):
    """``(violation, i, j)``: raising ``beta_i`` and lowering ``beta_j`` decreases the dual fastest."""
    up, down = _one_sided_derivatives(beta, g, C, epsilon)
    i = int(np.argmin(up))
    j = int(np.argmax(down))
    if i != j:
        return float(down[j] - up[i]), i, j
    up2 = up.copy()
    up2[j] = np.inf
    down2 = down.copy()
    down2[i] = -np.inf
    i2 = int(np.argmin(up2))
    j2 = int(np.argmax(down2))
    a = down[j] - up2[i2]
    b = down2[j2] - up[i]
    return (float(a), i2, j) if a >= b else (float(b), i, j2)


class LinearSVR:
    def __init__(self, C: float = 100.0, epsilon: float = 0.1, tol: float = 1e-3, max_iter: int = 1_000_000):
        if C <= 0 or epsilon < 0 or tol <= 0:
            raise ValueError("need C > 0, epsilon >= 0, tol > 0")
        self.C = float(C)
        self.epsilon = float(epsilon)
        self.tol = float(tol)
        self.max_iter = int(max_iter)

    def fit(self, X, y, seed: int = 0) -> "LinearSVR":
        X, y = _check_xy(X, y)
        n = X.shape[0]
        K = X @ X.T
        beta = np.zeros(n)
        g = -y.copy()  # K beta - y
        self.converged = n < 2
        self.n_iter = 0
        on_face_minimum = False
        while n >= 2 and self.n_iter < self.max_iter:
            violation, i, j = _most_violating_pair(beta, g, self.C, self.epsilon)
            if violation < self.tol:
                self.converged = True
                break
            face = None if on_face_minimum else _face_step(beta, g, K, self.C, self.epsilon)
            if face is not None and _dual(face[0], K, y, self.epsilon) < _dual(beta, K, y, self.epsilon):
                beta, on_face_minimum = face
                g = K @ beta - y
                self.n_iter += 1
                continue
            on_face_minimum = False
            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            t = _pair_step(beta[i], beta[j], g[i], g[j], eta, self.C, self.epsilon)
            if t == 0.0:
                self.converged = True
                break
            beta[i] += t
            beta[j] -= t
            g += t * (K[:, i] - K[:, j])
            self.n_iter += 1
        if not self.converged:
            warnings.warn(f"SVR dual did not converge in {self.max_iter} steps", ConvergenceWarning, stacklevel=2)
        coef = X.T @ beta
        intercept = best_intercept(y - X @ coef, self.epsilon)
        polished = _polish(beta, X, y, self.C, self.epsilon)
        if polished is not None:
            p_beta, p_b = polished
            p_coef = X.T @ p_beta
            if svr_primal_objective(p_coef, p_b, X, y, self.C, self.epsilon) < svr_primal_objective(
                coef, intercept, X, y, self.C, self.epsilon
            ):
                beta, coef, intercept = p_beta, p_coef, p_b
        self.dual_coef = beta
        self.coef = coef
        self.intercept = intercept
        self.n_features = X.shape[1]
        return self

    def dual_objective(self, X, y) -> float:
        K = np.asarray(X) @ np.asarray(X).T
        b = self.dual_coef
        return float(0.5 * b @ K @ b - np.asarray(y) @ b + self.epsilon * np.abs(b).sum())

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def to_state(self) -> dict:
        return {
            "dual_coef": self.dual_coef.tolist(),
            "coef": self.coef.tolist(),
            "intercept": self.intercept,
            "n_features": self.n_features,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    def load_state(self, s: dict) -> None:
        self.dual_coef = np.array(s["dual_coef"], dtype=float)
        self.coef = np.array(s["coef"], dtype=float)
        self.intercept = float(s["intercept"])
        self.n_features = s["n_features"]
        self.converged = s["converged"]
        self.n_iter = s["n_iter"]
