"""Dense convex QP solver (primal-dual interior point).

Solves::

    minimize    0.5 z'Qz + c'z
    subject to  A z = b,   lower <= z <= upper

with a Mehrotra predictor-corrector path-following method. Stationarity
is written as ``Qz + c - A'y - lam_lo + lam_up = 0`` with
``lam_lo, lam_up >= 0``.

When ``Q = B' K B`` is supplied in factored form (``factor=(K, B)``),
the Newton systems are reduced to the row space of ``B``. The
one-class slab dual has this shape with ``B = [I, -I]``, which halves
the size of every factorization.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import lsq_linear

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"
INFEASIBLE = "infeasible"

_SYMMETRY_RTOL = 1e-12
_REFINEMENT_STEPS = 2
_POLISH_ROUNDS = 8
_POLISH_MAX_FREE = 600
_POLISH_EXTRA_ITERATIONS = 12


class QpError(ValueError):
    """Malformed QP problem."""


def _vec(x, n, name):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (n,):
        raise QpError(f"{name} must have length {n}, got {x.shape[0]}")
    return x


@dataclass(frozen=True)
class QpProblem:
    """Convex QP data. `Q` is symmetrized on construction.

    `factor` optionally holds ``(K, B)`` with ``Q == B.T @ K @ B``,
    ``K`` symmetric PSD and ``B`` of full row rank.
    """

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    factor: Optional[tuple] = None

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] < 1:
            raise QpError("Q must be a non-empty square matrix")
        n = Q.shape[0]
        if not np.all(np.isfinite(Q)):
            raise QpError("Q contains non-finite values")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > _SYMMETRY_RTOL * scale:
            raise QpError("Q is not symmetric")
        Q = 0.5 * (Q + Q.T)
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = np.zeros((0, n))
        if A.ndim == 1:
            A = A[None, :]
        if A.ndim != 2 or A.shape[1] != n:
            raise QpError(f"A must have {n} columns")
        b = _vec(self.b, A.shape[0], "b") if A.shape[0] else np.zeros(0)
        lower = _vec(self.lower, n, "lower")
        upper = _vec(self.upper, n, "upper")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise QpError("bounds must not be NaN")
        if np.any(lower > upper):
            raise QpError("lower bound exceeds upper bound")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise QpError("bounds exclude every point")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", _vec(self.c, n, "c"))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.factor is not None:
            K, B = self.factor
            K = np.asarray(K, dtype=float)
            B = sp.csr_matrix(B, dtype=float) if sp.issparse(B) else np.asarray(B, dtype=float)
            if K.ndim != 2 or K.shape[0] != K.shape[1] or B.shape != (K.shape[0], n):
                raise QpError("factor must be (K, B) with K r x r and B r x n")
            object.__setattr__(self, "factor", (K, B))

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def p(self):
        return self.A.shape[0]

    def objective(self, z):
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.c @ z)


@dataclass(frozen=True)
class SolverConfig:
    """Interior-point settings.

    `ridge` is added to the diagonal of Q inside the Newton systems only;
    ``None`` means ``1e-10`` times the mean diagonal of Q. With `polish`
    the interior-point answer is refined by an active-set solve that
    puts variables exactly on their bounds when that certifies.
    """

    tolerance: float = 1e-8
    max_iterations: int = 100
    ridge: Optional[float] = None
    step_fraction: float = 0.995
    polish: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise QpError("tolerance must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise QpError("max_iterations must be a positive integer")
        if self.ridge is not None and not self.ridge >= 0:
            raise QpError("ridge must be nonnegative")
        if not 0 < self.step_fraction < 1:
            raise QpError("step_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class KktResiduals:
    """Max-norm KKT residuals of a candidate solution.

    `bound_violation` also covers negative bound multipliers.
    """

    stationarity: float
    primal_equality: float
    bound_violation: float
    complementarity: float

    @property
    def worst(self):
        return max(self.stationarity, self.primal_equality,
                   self.bound_violation, self.complementarity)

    def satisfied(self, tolerance):
        return self.worst <= tolerance


@dataclass(frozen=True)
class QpSolution:
    z: np.ndarray
    equality_multipliers: np.ndarray
    bound_multipliers_lower: np.ndarray
    bound_multipliers_upper: np.ndarray
    objective: float
    iterations: int
    status: str
    residuals: Optional[KktResiduals] = None
    merit_history: tuple = field(default=(), repr=False)
    tolerance: Optional[float] = None
    polished: bool = False

    @property
    def converged(self):
        return self.status == CONVERGED

    @property
    def near_converged(self):
        """Stopped at the iteration cap with residuals within 10x tolerance."""
        return self.status == MAX_ITERATIONS and self.residuals is not None \
            and self.tolerance is not None and self.residuals.worst <= 10 * self.tolerance


def kkt_residuals(problem: QpProblem, solution: QpSolution) -> KktResiduals:
    """Evaluate the KKT conditions of `problem` at `solution`."""
    z = np.asarray(solution.z, dtype=float)
    y = np.asarray(solution.equality_multipliers, dtype=float)
    lam_lo = np.asarray(solution.bound_multipliers_lower, dtype=float)
    lam_up = np.asarray(solution.bound_multipliers_upper, dtype=float)
    n, p = problem.n, problem.p
    if z.shape != (n,) or y.shape != (p,) or lam_lo.shape != (n,) or lam_up.shape != (n,):
        raise QpError("solution dimensions do not match the problem")
    grad = problem.Q @ z + problem.c - problem.A.T @ y - lam_lo + lam_up
    stationarity = float(np.max(np.abs(grad))) if n else 0.0
    primal = float(np.max(np.abs(problem.A @ z - problem.b))) if p else 0.0
    fin_lo = np.isfinite(problem.lower)
    fin_up = np.isfinite(problem.upper)
    viol = [0.0]
    viol.append(float(np.max(np.where(fin_lo, problem.lower - z, 0.0))))
    viol.append(float(np.max(np.where(fin_up, z - problem.upper, 0.0))))
    viol.append(float(np.max(-lam_lo)))
    viol.append(float(np.max(-lam_up)))
    # multipliers on infinite bounds must vanish
    viol.append(float(np.max(np.where(fin_lo, 0.0, np.abs(lam_lo)))))
    viol.append(float(np.max(np.where(fin_up, 0.0, np.abs(lam_up)))))
    comp_lo = np.where(fin_lo, np.abs((z - np.where(fin_lo, problem.lower, 0.0)) * lam_lo), 0.0)
    comp_up = np.where(fin_up, np.abs((np.where(fin_up, problem.upper, 0.0) - z) * lam_up), 0.0)
    complementarity = float(max(np.max(comp_lo), np.max(comp_up)))
    return KktResiduals(stationarity, primal, max(viol), complementarity)


class _NewtonSystem:
    """Factorization of ``H = Q + diag(d) (+ ridge)`` for repeated solves."""

    def __init__(self, problem, d, ridge):
        self._d = d
        use_factor = problem.factor is not None and np.all(d > 0)
        if use_factor:
            K, B = problem.factor
            self._B = B
            self._K = K
            dinv = 1.0 / d
            if sp.issparse(B):
                M = (B @ sp.diags(dinv) @ B.T).toarray()
            else:
                M = (B * dinv) @ B.T
            if _is_diagonal(M):
                Minv = np.diag(1.0 / np.diag(M))
            else:
                Minv = np.linalg.inv(M)
            S = Minv + K
            self._Minv = Minv
            self._chol = _robust_cholesky(S, ridge, diag_scale=np.mean(np.abs(np.diag(K))) or 1.0)
            self._dinv = dinv
            self._mode = "factored"
        else:
            H = problem.Q + np.diag(d)
            self._chol = _robust_cholesky(H, ridge, diag_scale=np.mean(np.abs(np.diag(problem.Q))) or 1.0)
            self._mode = "dense"

    def solve(self, rhs):
        if self._mode == "dense":
            return sla.cho_solve(self._chol, rhs)
        dinv = self._dinv if rhs.ndim == 1 else self._dinv[:, None]
        t = dinv * rhs
        y = sla.cho_solve(self._chol, self._Minv @ (self._B @ t))
        return t - dinv * (self._B.T @ (self._K @ y))


def _is_diagonal(M):
    return np.count_nonzero(M - np.diag(np.diag(M))) == 0


def _robust_cholesky(H, ridge, diag_scale):
    reg = ridge
    for _ in range(12):
        try:
            return sla.cho_factor(H + reg * np.eye(H.shape[0]), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            reg = max(10 * reg, 1e-12 * diag_scale)
            log.debug("cholesky failed, increasing ridge to %g", reg)
    raise np.linalg.LinAlgError("Newton matrix could not be factorized")


def _max_step(v, dv):
    """Largest t in [0, inf) with v + t*dv >= 0 (v > 0)."""
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _backtrack(mu_of, mu, sl, su, ll, lu, dz, dll, dlu, t, tries):
    for _ in range(tries):
        if mu_of(sl + t * dz, su - t * dz, ll + t * dll, lu + t * dlu) <= mu:
            return t
        t *= 0.5
    return None


def _feasible_start(problem, tolerance):
    """Check feasibility and return a point satisfying the constraints if any."""
    lo, up = problem.lower, problem.upper
    if problem.p == 0:
        return True, np.clip(np.zeros(problem.n), lo, up)
    z, *_ = np.linalg.lstsq(problem.A, problem.b, rcond=None)
    z = np.clip(z, lo, up)
    if np.max(np.abs(problem.A @ z - problem.b)) <= tolerance:
        return True, z
    res = lsq_linear(problem.A, problem.b, bounds=(lo, up), tol=1e-14)
    z = np.clip(res.x, lo, up)
    return bool(np.max(np.abs(problem.A @ z - problem.b)) <= tolerance), z


def _initial_point(problem):
    lo, up = problem.lower, problem.upper
    fin_lo, fin_up = np.isfinite(lo), np.isfinite(up)
    lo0, up0 = np.where(fin_lo, lo, 0.0), np.where(fin_up, up, 0.0)
    mid = np.where(fin_lo & fin_up, 0.5 * (lo0 + up0),
                   np.where(fin_lo, lo0 + 1.0, np.where(fin_up, up0 - 1.0, 0.0)))
    z = mid
    if problem.p:
        shift, *_ = np.linalg.lstsq(problem.A, problem.b - problem.A @ mid, rcond=None)
        z = mid + shift
    width = np.where(fin_lo & fin_up, up - lo, 1.0)
    push = 1e-3 * width
    z = np.where(fin_lo, np.maximum(z, lo + push), z)
    z = np.where(fin_up, np.minimum(z, up - push), z)
    return z


def solve(problem: QpProblem, config: Optional[SolverConfig] = None) -> QpSolution:
    """Minimize the QP; never raises on non-convergence, see ``status``."""
    config = config or SolverConfig()
    fixed = problem.lower == problem.upper
    if np.any(fixed):
        return _solve_with_fixed(problem, config, fixed)
    feasible, z_feas = _feasible_start(problem, config.tolerance)
    if not feasible:
        zeros_n = np.zeros(problem.n)
        sol = QpSolution(z_feas, np.zeros(problem.p), zeros_n, zeros_n.copy(),
                         problem.objective(z_feas), 0, INFEASIBLE, tolerance=config.tolerance)
        return _with_residuals(problem, sol)
    return _interior_point(problem, config)


def _with_residuals(problem, sol):
    object.__setattr__(sol, "residuals", kkt_residuals(problem, sol))
    return sol


def _solve_with_fixed(problem, config, fixed):
    free = ~fixed
    zf = problem.lower[fixed]
    n = problem.n
    if not np.any(free):
        z = problem.lower.copy()
        if problem.p and np.max(np.abs(problem.A @ z - problem.b)) > config.tolerance:
            status = INFEASIBLE
            y = np.zeros(problem.p)
        else:
            status = CONVERGED
            y = np.linalg.lstsq(problem.A.T, problem.Q @ z + problem.c, rcond=None)[0] \
                if problem.p else np.zeros(0)
        g = problem.Q @ z + problem.c - problem.A.T @ y
        sol = QpSolution(z, y, np.maximum(g, 0), np.maximum(-g, 0),
                         problem.objective(z), 0, status, tolerance=config.tolerance)
        return _with_residuals(problem, sol)
    Qff = problem.Q[np.ix_(free, free)]
    reduced = QpProblem(
        Q=Qff,
        c=problem.c[free] + problem.Q[np.ix_(free, fixed)] @ zf,
        A=problem.A[:, free],
        b=problem.b - problem.A[:, fixed] @ zf,
        lower=problem.lower[free],
        upper=problem.upper[free],
    )
    inner = solve(reduced, config)
    z = problem.lower.copy()
    z[free] = inner.z
    lam_lo = np.zeros(n)
    lam_up = np.zeros(n)
    lam_lo[free] = inner.bound_multipliers_lower
    lam_up[free] = inner.bound_multipliers_upper
    g = problem.Q @ z + problem.c - problem.A.T @ inner.equality_multipliers
    lam_lo[fixed] = np.maximum(g[fixed], 0)
    lam_up[fixed] = np.maximum(-g[fixed], 0)
    sol = QpSolution(z, inner.equality_multipliers, lam_lo, lam_up, problem.objective(z),
                     inner.iterations, inner.status, merit_history=inner.merit_history,
                     tolerance=config.tolerance)
    return _with_residuals(problem, sol)


def _interior_point(problem, config):
    Q, c, A, b = problem.Q, problem.c, problem.A, problem.b
    lo, up = problem.lower, problem.upper
    n, p = problem.n, problem.p
    fin_lo, fin_up = np.isfinite(lo), np.isfinite(up)
    n_bounds = int(fin_lo.sum() + fin_up.sum())
    lo0 = np.where(fin_lo, lo, 0.0)
    up0 = np.where(fin_up, up, 0.0)
    tol = config.tolerance
    ridge = config.ridge
    if ridge is None:
        ridge = 1e-10 * max(float(np.mean(np.diag(Q))), 0.0)

    z = _initial_point(problem)
    y = np.zeros(p)
    lam_lo = fin_lo.astype(float)
    lam_up = fin_up.astype(float)

    def slacks(z):
        return np.where(fin_lo, z - lo0, 1.0), np.where(fin_up, up0 - z, 1.0)

    def mu_of(sl, su, ll, lu):
        if n_bounds == 0:
            return 0.0
        return float((np.sum(sl * ll) + np.sum(su * lu)) / n_bounds)

    def make(z, y, ll, lu, it, status, merits):
        sol = QpSolution(z.copy(), y.copy(), ll.copy(), lu.copy(), problem.objective(z),
                         it, status, merit_history=tuple(merits), tolerance=tol)
        return _with_residuals(problem, sol)

    # slacks are carried as iterates; recomputing them from z cancels to 0 near bounds
    sl, su = slacks(z)
    merits = []
    best = None
    converged_at = None
    extra = 0
    for it in range(config.max_iterations + 1):
        rd = Q @ z + c - A.T @ y - lam_lo + lam_up
        rp = A @ z - b
        mu = mu_of(sl, su, lam_lo, lam_up)
        merits.append(mu)
        current = make(z, y, lam_lo, lam_up, it, CONVERGED, merits)
        worst = current.residuals.worst
        if best is None or worst < best[0]:
            best = (worst, current)
        if worst <= tol:
            if not config.polish:
                return current
            # keep iterating past the tolerance: a deeper iterate gives the
            # active-set guess the polish needs
            converged_at = current
            polished = _polish(problem, current, tol)
            if polished is not None:
                return polished
            extra += 1
            if extra > _POLISH_EXTRA_ITERATIONS:
                return converged_at
        elif converged_at is not None:
            return converged_at
        if it == config.max_iterations:
            break

        d = np.where(fin_lo, lam_lo / sl, 0.0) + np.where(fin_up, lam_up / su, 0.0)
        try:
            system = _NewtonSystem(problem, d, ridge)
        except np.linalg.LinAlgError:
            log.warning("Newton system singular at iteration %d", it)
            break
        HinvAt = system.solve(A.T) if p else np.zeros((n, 0))
        schur = A @ HinvAt if p else None

        def reduced_solve(g, h):
            # solve [H -A'; A 0] [dz; dy] = [g; h]
            Hg = system.solve(g)
            if not p:
                return Hg, np.zeros(0)
            rhs = h - A @ Hg
            try:
                dy = np.linalg.solve(schur, rhs)
            except np.linalg.LinAlgError:
                dy = np.linalg.lstsq(schur, rhs, rcond=None)[0]
            return Hg + HinvAt @ dy, dy

        def direction(t_lo, t_up):
            # t_lo, t_up: complementarity targets minus current products
            r_lo = np.where(fin_lo, t_lo / sl, 0.0)
            r_up = np.where(fin_up, t_up / su, 0.0)
            g = -rd + r_lo - r_up
            dz, dy = reduced_solve(g, -rp)
            # iterative refinement against the unregularized system
            for _ in range(_REFINEMENT_STEPS):
                res_g = g - (Q @ dz + d * dz - A.T @ dy)
                res_h = -rp - A @ dz
                if max(np.max(np.abs(res_g)), np.max(np.abs(res_h), initial=0.0)) == 0.0:
                    break
                cz, cy = reduced_solve(res_g, res_h)
                dz, dy = dz + cz, dy + cy
            dll = np.where(fin_lo, r_lo - lam_lo / sl * dz, 0.0)
            dlu = np.where(fin_up, r_up + lam_up / su * dz, 0.0)
            return dz, dy, dll, dlu

        def step_length(dz, dll, dlu):
            t = min(_max_step(sl[fin_lo], dz[fin_lo]), _max_step(su[fin_up], -dz[fin_up]),
                    _max_step(lam_lo[fin_lo], dll[fin_lo]), _max_step(lam_up[fin_up], dlu[fin_up]))
            return t

        # predictor
        dz_a, _, dll_a, dlu_a = direction(-sl * lam_lo, -su * lam_up)
        t_aff = min(1.0, step_length(dz_a, dll_a, dlu_a))
        mu_aff = mu_of(sl + t_aff * dz_a, su - t_aff * dz_a,
                       lam_lo + t_aff * dll_a, lam_up + t_aff * dlu_a)
        sigma = min((mu_aff / mu) ** 3, 0.9) if mu > 0 else 0.0

        # corrector
        t_lo = sigma * mu - sl * lam_lo - dz_a * dll_a
        t_up = sigma * mu - su * lam_up + dz_a * dlu_a
        dz, dy, dll, dlu = direction(t_lo, t_up)
        t = min(1.0, config.step_fraction * step_length(dz, dll, dlu))

        # the merit (mean complementarity) must not increase; the second-order
        # correction can break that, the plain centering direction cannot
        t = _backtrack(mu_of, mu, sl, su, lam_lo, lam_up, dz, dll, dlu, t, 8)
        if t is None:
            sigma = max(sigma, 0.1)
            dz, dy, dll, dlu = direction(sigma * mu - sl * lam_lo, sigma * mu - su * lam_up)
            t = min(1.0, config.step_fraction * step_length(dz, dll, dlu))
            t = _backtrack(mu_of, mu, sl, su, lam_lo, lam_up, dz, dll, dlu, t, 60) or 0.0
        log.debug("it %d mu %.3e stat %.3e prim %.3e sigma %.3f step %.3e",
                  it, mu, np.max(np.abs(rd)), np.max(np.abs(rp)) if p else 0.0, sigma, t)
        z = z + t * dz
        sl = np.where(fin_lo, sl + t * dz, 1.0)
        su = np.where(fin_up, su - t * dz, 1.0)
        y = y + t * dy
        lam_lo = lam_lo + t * dll
        lam_up = lam_up + t * dlu
        if t < 1e-14:
            log.debug("interior point stalled at iteration %d", it)
            break

    if converged_at is not None:
        return converged_at
    sol = best[1]
    if config.polish:
        polished = _polish(problem, sol, tol)
        if polished is not None:
            return polished
    object.__setattr__(sol, "status", MAX_ITERATIONS)
    object.__setattr__(sol, "merit_history", tuple(merits))
    return sol


def _polish(problem, sol, tol):
    """Active-set refinement of an interior-point iterate.

    Guesses the active bounds from slack/multiplier dominance, solves the
    equality-constrained subproblem on the free variables exactly and
    repairs the guess a few times. Returns None unless the result
    certifies at `tol` without raising the objective.
    """
    Q, c, A, b = problem.Q, problem.c, problem.A, problem.b
    lo, up = problem.lower, problem.upper
    n, p = problem.n, problem.p
    fin_lo, fin_up = np.isfinite(lo), np.isfinite(up)
    z = sol.z
    ridge = 1e-13 * max(float(np.mean(np.abs(np.diag(Q)))), 1e-300)
    at_lo = fin_lo & (z - np.where(fin_lo, lo, 0.0) < sol.bound_multipliers_lower)
    at_up = fin_up & (np.where(fin_up, up, 0.0) - z < sol.bound_multipliers_upper) & ~at_lo
    if int(n - at_lo.sum() - at_up.sum()) > _POLISH_MAX_FREE:
        return None
    seen = set()
    for _ in range(_POLISH_ROUNDS):
        key = (at_lo.tobytes(), at_up.tobytes())
        if key in seen:
            return None
        seen.add(key)
        free = ~(at_lo | at_up)
        zp = np.where(at_lo, lo, np.where(at_up, up, 0.0))
        nf = int(free.sum())
        if nf:
            Af = A[:, free]
            kkt = np.zeros((nf + p, nf + p))
            kkt[:nf, :nf] = Q[np.ix_(free, free)]
            kkt[:nf, nf:] = -Af.T
            kkt[nf:, :nf] = Af
            rhs = np.concatenate([-c[free] - Q[np.ix_(free, ~free)] @ zp[~free],
                                  b - A[:, ~free] @ zp[~free]])
            # a tiny ridge keeps singular free blocks (rank-deficient kernels) solvable
            kkt[:nf, :nf] += ridge * np.eye(nf)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", sla.LinAlgWarning)
                    sol_f = sla.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                return None
            zp[free] = sol_f[:nf]
            y = sol_f[nf:]
        else:
            y = np.linalg.lstsq(A.T, Q @ zp + c, rcond=None)[0] if p else np.zeros(0)
        g = Q @ zp + c - A.T @ y
        below = free & fin_lo & (zp < lo - tol)
        above = free & fin_up & (zp > up + tol)
        wrong_lo = at_lo & (g < -tol)
        wrong_up = at_up & (g > tol)
        log.debug("polish round: free %d below %d above %d wrong_lo %d wrong_up %d",
                  nf, below.sum(), above.sum(), wrong_lo.sum(), wrong_up.sum())
        if not (below.any() or above.any() or wrong_lo.any() or wrong_up.any()):
            zp = np.clip(zp, lo, up)
            lam_lo = np.where(at_lo, np.maximum(g, 0.0), 0.0)
            lam_up = np.where(at_up, np.maximum(-g, 0.0), 0.0)
            cand = QpSolution(zp, y, lam_lo, lam_up, problem.objective(zp), sol.iterations,
                              CONVERGED, merit_history=sol.merit_history, tolerance=tol,
                              polished=True)
            cand = _with_residuals(problem, cand)
            if cand.residuals.worst <= tol and \
                    cand.objective <= sol.objective + tol * (1.0 + abs(sol.objective)):
                return cand
            return None
        at_lo = (at_lo & ~wrong_lo) | below
        at_up = (at_up & ~wrong_up) | above
    return None
