"""One-class slab SVM and the one-class SVM baseline.

The slab model keeps two parallel hyperplanes sharing the normal
``w = sum_i (alpha_i - alpha_bar_i) phi(x_i)``. A sample is accepted when
its score lands strictly between the offsets ``rho1 < s(x) < rho2``.
Training solves the dual::

    minimize    0.5 (a - ab)' K (a - ab)
    subject to  sum(a) = 1,        0 <= a  <= 1 / (nu1 m)
                sum(ab) = epsilon, 0 <= ab <= epsilon / (nu2 m)

Samples whose dual variable sits strictly inside its box lie on a plane,
and their scores give the offsets.
"""
from __future__ import annotations

import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from .kernels import KernelSpec, gram_matrix, kernel_expansion
from .qp import QpProblem, SolverConfig, solve

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 2.0 / 3.0
PRUNE_THRESHOLD = 1e-8

# KKT case labels
INTERIOR_SLAB = "interior_slab"
ON_LOWER_PLANE = "on_lower_plane"
ON_UPPER_PLANE = "on_upper_plane"
BELOW_SLAB_OUTLIER = "below_slab_outlier"
ABOVE_SLAB_OUTLIER = "above_slab_outlier"
INVALID = "invalid"
CASE_LABELS = (INTERIOR_SLAB, ON_LOWER_PLANE, ON_UPPER_PLANE,
               BELOW_SLAB_OUTLIER, ABOVE_SLAB_OUTLIER, INVALID)

# model flags
LOWER_FALLBACK = "lower_plane_fallback"
UPPER_FALLBACK = "upper_plane_fallback"
DEGENERATE = "degenerate_slab"
ORDER_VIOLATION = "rho_order_violation"
OFFSET_FALLBACK = "offset_fallback"

SLAB_HEADER = "OCSSVM-MODEL"
OCSVM_HEADER = "OCSVM-MODEL"
FORMAT_VERSION = "v1"


class SlabError(ValueError):
    """Invalid training input or configuration."""


class NonConvergenceError(RuntimeError):
    """The QP solver stopped without certifying optimality.

    The partially trained model and the raw solver output are attached so
    that callers can still inspect or save them.
    """

    def __init__(self, message, model=None, solution=None):
        super().__init__(message)
        self.model = model
        self.solution = solution


class ModelFormatError(ValueError):
    """Base class for model-file problems."""


class VersionMismatchError(ModelFormatError):
    pass


class MalformedModelError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


def _check_nu(value, name):
    value = float(value)
    if not (0.0 < value <= 1.0):
        raise SlabError(f"{name} must lie in (0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class SlabTrainConfig:
    """Parameters of one slab training run.

    Parameters
    ----------
    nu1, nu2 : float
        Outlier-fraction controls for the lower and upper plane, in (0, 1].
    epsilon : float
        Mass of the upper-plane dual variables. Must differ from 1, which
        yields the trivial solution ``w = 0``.
    kernel : KernelSpec
    solver : SolverConfig
    sv_bound_tolerance : float
        Band, relative to each box width, used to decide whether a dual
        variable sits at a bound or strictly inside.
    """

    nu1: float = 0.10
    nu2: float = 0.01
    epsilon: float = DEFAULT_EPSILON
    kernel: KernelSpec = field(default_factory=KernelSpec.linear)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sv_bound_tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "nu1", _check_nu(self.nu1, "nu1"))
        object.__setattr__(self, "nu2", _check_nu(self.nu2, "nu2"))
        eps = float(self.epsilon)
        if not (np.isfinite(eps) and eps > 0.0):
            raise SlabError(f"epsilon must be positive, got {self.epsilon!r}")
        if eps == 1.0:
            raise SlabError("epsilon must differ from 1 (epsilon = 1 gives the trivial solution w = 0)")
        object.__setattr__(self, "epsilon", eps)
        if not isinstance(self.kernel, KernelSpec):
            raise SlabError("kernel must be a KernelSpec")
        if not self.sv_bound_tolerance > 0:
            raise SlabError("sv_bound_tolerance must be positive")

    def caps(self, m):
        """Upper box bounds ``(1/(nu1 m), epsilon/(nu2 m))``."""
        return 1.0 / (self.nu1 * m), self.epsilon / (self.nu2 * m)


def _retained(coef):
    return np.flatnonzero(np.abs(coef) > PRUNE_THRESHOLD)


def _scores(kernel, sv, coef, X):
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2:
        raise SlabError("probes must be a feature vector or a matrix of rows")
    if X.shape[0] == 0:
        return np.zeros(0)
    if X.shape[1] != sv.shape[1]:
        raise SlabError(f"dimension mismatch: model has {sv.shape[1]} features, got {X.shape[1]}")
    if sv.shape[0] == 0:
        out = np.zeros(X.shape[0])
    else:
        out = kernel_expansion(kernel, X, sv, coef)
    return out[0] if single else out


def _sign_test(s, rho1, rho2):
    """+1 where ``sgn((s - rho1)(rho2 - s)) > 0``, sgn(0) counted as negative."""
    inside = np.sign(s - rho1) * np.sign(rho2 - s) > 0
    return np.where(inside, 1, -1)


@dataclass(frozen=True, eq=False)
class SlabModel:
    """A trained one-class slab SVM.

    `training_rows`, `alpha` and `alpha_bar` cover every training sample.
    Scores are evaluated over the retained rows only, i.e. those whose
    coefficient ``alpha - alpha_bar`` exceeds ``1e-8`` in magnitude.
    """

    training_rows: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    rho1: float
    rho2: float
    kernel: KernelSpec
    train_config: SlabTrainConfig
    n_sv1: int
    n_sv2: int
    flags: frozenset = frozenset()
    converged: bool = True
    objective: float = float("nan")
    iterations: int = 0

    def __post_init__(self):
        coef = self.alpha - self.alpha_bar
        keep = _retained(coef)
        for arr in (self.training_rows, self.alpha, self.alpha_bar):
            arr.setflags(write=False)
        sv = self.training_rows[keep]
        c = coef[keep]
        sv.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "_sv", sv)
        object.__setattr__(self, "_coef", c)

    @property
    def m(self):
        return self.training_rows.shape[0]

    @property
    def dim(self):
        return self.training_rows.shape[1]

    @property
    def support_vectors(self):
        return self._sv

    @property
    def coefficients(self):
        """``alpha - alpha_bar`` restricted to the retained rows."""
        return self._coef

    @property
    def epsilon(self):
        return self.train_config.epsilon

    def scores(self, X):
        return _scores(self.kernel, self._sv, self._coef, X)

    def predict(self, X):
        return _sign_test(self.scores(X), self.rho1, self.rho2)


@dataclass(frozen=True, eq=False)
class OcsvmModel:
    """A trained one-class SVM (single hyperplane) used as baseline."""

    training_rows: np.ndarray
    alpha: np.ndarray
    rho: float
    nu: float
    kernel: KernelSpec
    flags: frozenset = frozenset()
    converged: bool = True
    objective: float = float("nan")
    iterations: int = 0

    def __post_init__(self):
        keep = _retained(self.alpha)
        for arr in (self.training_rows, self.alpha):
            arr.setflags(write=False)
        sv = self.training_rows[keep]
        c = self.alpha[keep]
        sv.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "_sv", sv)
        object.__setattr__(self, "_coef", c)

    @property
    def m(self):
        return self.training_rows.shape[0]

    @property
    def dim(self):
        return self.training_rows.shape[1]

    @property
    def support_vectors(self):
        return self._sv

    @property
    def coefficients(self):
        return self._coef

    def scores(self, X):
        return _scores(self.kernel, self._sv, self._coef, X)

    def predict(self, X):
        s = self.scores(X)
        return np.where(np.sign(s - self.rho) > 0, 1, -1)


class Offsets(NamedTuple):
    rho1: float
    rho2: float
    n_sv1: int
    n_sv2: int
    flags: frozenset = frozenset()


def _as_gram(gram):
    K = np.asarray(getattr(gram, "values", gram), dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise SlabError("gram must be a square matrix")
    return K


def _band(values, cap, rel_tol):
    """Masks (at zero, strictly inside, at cap) for variables in ``[0, cap]``."""
    tol = rel_tol * cap
    low = values <= tol
    high = values >= cap - tol
    return low, ~(low | high), high & ~low


def _order_flags(rho1, rho2, scale):
    flags = set()
    gap = rho2 - rho1
    if gap < -1e-8:
        flags.add(ORDER_VIOLATION)
    if gap <= 1e-8 * max(1.0, scale):
        flags.add(DEGENERATE)
    return flags


def compute_offsets(gram, alpha, alpha_bar, config: SlabTrainConfig) -> Offsets:
    """Plane offsets as mean scores of the on-plane samples.

    ``rho1`` averages ``s_i = (K (alpha - alpha_bar))_i`` over samples whose
    ``alpha_i`` lies strictly inside ``(0, 1/(nu1 m))``, and ``rho2`` does
    the same for ``alpha_bar_i`` inside ``(0, epsilon/(nu2 m))``. The band
    separating "inside" from "at a bound" is ``sv_bound_tolerance`` times
    the box width.

    When a plane has no such sample, its offset falls back to the extreme
    score of the samples that are not lower (resp. upper) outliers:
    ``rho1 = min{s_i : alpha_i ~ 0}`` and ``rho2 = max{s_i : alpha_bar_i ~ 0}``.
    The returned flags record every fallback and a zero-width slab.
    """
    K = _as_gram(gram)
    alpha = np.asarray(alpha, dtype=float)
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    m = K.shape[0]
    if alpha.shape != (m,) or alpha_bar.shape != (m,):
        raise SlabError("dual vectors must match the Gram matrix size")
    cap1, cap2 = config.caps(m)
    s = K @ (alpha - alpha_bar)
    zero1, free1, _ = _band(alpha, cap1, config.sv_bound_tolerance)
    zero2, free2, _ = _band(alpha_bar, cap2, config.sv_bound_tolerance)
    flags = set()
    n1, n2 = int(free1.sum()), int(free2.sum())
    if n1:
        rho1 = float(s[free1].mean())
    else:
        flags.add(LOWER_FALLBACK)
        rho1 = float(s[zero1].min()) if zero1.any() else float(s.min())
    if n2:
        rho2 = float(s[free2].mean())
    else:
        flags.add(UPPER_FALLBACK)
        rho2 = float(s[zero2].max()) if zero2.any() else float(s.max())
    flags |= _order_flags(rho1, rho2, float(np.abs(s).max(initial=0.0)))
    return Offsets(rho1, rho2, n1, n2, frozenset(flags))


def _free_by_multipliers(sol, lo, up):
    """Variables the interior-point iterate identifies as off both bounds.

    A variable counts as free when its distance to each bound exceeds the
    multiplier of that bound, the usual primal-dual active-set estimate.
    """
    z = sol.z
    lam = np.maximum(sol.bound_multipliers_lower, sol.bound_multipliers_upper)
    return np.minimum(z - lo, up - z) > lam


def _check_rows(X, min_rows):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise SlabError("training data must be a 2-D matrix of rows")
    if X.shape[0] < min_rows:
        raise SlabError(f"at least {min_rows} training rows required, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise SlabError("training rows must have at least one feature")
    return np.array(X, dtype=float, copy=True)


def slab_problem(K, config: SlabTrainConfig) -> QpProblem:
    """The slab dual as a QP over ``z = (alpha, alpha_bar)``."""
    m = K.shape[0]
    cap1, cap2 = config.caps(m)
    B = sp.hstack([sp.identity(m), -sp.identity(m)], format="csr")
    Q = np.block([[K, -K], [-K, K]])
    A = np.zeros((2, 2 * m))
    A[0, :m] = 1.0
    A[1, m:] = 1.0
    lower = np.zeros(2 * m)
    upper = np.concatenate([np.full(m, cap1), np.full(m, cap2)])
    return QpProblem(Q, np.zeros(2 * m), A, np.array([1.0, config.epsilon]),
                     lower, upper, factor=(K, B))


def train_slab(X, config: Optional[SlabTrainConfig] = None) -> SlabModel:
    """Train a one-class slab SVM on the rows of `X`.

    Parameters
    ----------
    X : array_like, shape (m, d)
        Positive training samples, ``m >= 2``.
    config : SlabTrainConfig, optional

    Returns
    -------
    SlabModel

    Raises
    ------
    SlabError
        Bad input or configuration.
    NonConvergenceError
        The solver did not certify optimality. The partial model is
        attached to the exception.

    Notes
    -----
    If the solver's active-set polish certifies the solution, the offsets
    come from :func:`compute_offsets`. Otherwise the dual values are only
    interior-point approximations, whose near-bound entries cannot be told
    apart from on-plane ones by a fixed band. The offsets are then read
    from the multipliers of the two equality constraints, which by
    stationarity equal the score of every on-plane sample.
    """
    config = config or SlabTrainConfig()
    X = _check_rows(X, 2)
    m = X.shape[0]
    K = gram_matrix(config.kernel, X)
    problem = slab_problem(K, config)
    sol = solve(problem, config.solver)
    alpha = np.clip(sol.z[:m], problem.lower[:m], problem.upper[:m])
    alpha_bar = np.clip(sol.z[m:], problem.lower[m:], problem.upper[m:])
    offsets = _slab_offsets(K, alpha, alpha_bar, config, sol, problem)
    model = SlabModel(X, alpha, alpha_bar, offsets.rho1, offsets.rho2, config.kernel,
                      config, offsets.n_sv1, offsets.n_sv2, offsets.flags,
                      converged=sol.converged, objective=sol.objective,
                      iterations=sol.iterations)
    if offsets.flags:
        log.info("slab model flags: %s", ", ".join(sorted(offsets.flags)))
    if not sol.converged:
        raise NonConvergenceError(
            f"slab QP did not converge ({sol.status}, worst KKT residual "
            f"{sol.residuals.worst if sol.residuals else float('nan'):.3g})",
            model=model, solution=sol)
    return model


def _slab_offsets(K, alpha, alpha_bar, config, sol, problem):
    if sol.polished or not sol.converged or problem.p != 2:
        return compute_offsets(K, alpha, alpha_bar, config)
    m = K.shape[0]
    free = _free_by_multipliers(sol, problem.lower, problem.upper)
    n1, n2 = int(free[:m].sum()), int(free[m:].sum())
    if n1 == 0 or n2 == 0:
        return compute_offsets(K, alpha, alpha_bar, config)
    y = sol.equality_multipliers
    rho1, rho2 = float(y[0]), float(-y[1])
    s = K @ (alpha - alpha_bar)
    flags = _order_flags(rho1, rho2, float(np.abs(s).max(initial=0.0)))
    return Offsets(rho1, rho2, n1, n2, frozenset(flags))


def score(model, x) -> float:
    """Score ``sum_i coef_i k(x, x_i)`` of a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise SlabError("score expects a single feature vector; use scores() for matrices")
    return float(model.scores(x))


def scores(model, X) -> np.ndarray:
    """Scores of every row of `X`."""
    return model.scores(np.atleast_2d(np.asarray(X, dtype=float)))


def predict(model: SlabModel, x) -> int:
    """+1 when the score lies strictly inside the slab, -1 otherwise."""
    return int(_sign_test(score(model, x), model.rho1, model.rho2))


def predict_many(model, X) -> np.ndarray:
    """Labels for every row of `X` (works for both model types)."""
    return model.predict(np.atleast_2d(np.asarray(X, dtype=float)))


def train_ocsvm(X, nu: float = 0.1, kernel: Optional[KernelSpec] = None,
                solver: Optional[SolverConfig] = None,
                bound_tolerance: float = 1e-6) -> OcsvmModel:
    """Train the single-hyperplane one-class SVM.

    Solves ``min 0.5 a'Ka`` subject to ``sum(a) = 1`` and
    ``0 <= a <= 1/(nu m)``. The offset is the mean score of samples whose
    ``a_i`` lies strictly inside the box. Without such samples it is the
    midpoint between the largest score among capped samples and the
    smallest score among zero samples, and the model is flagged.
    """
    nu = _check_nu(nu, "nu")
    kernel = kernel or KernelSpec.linear()
    X = _check_rows(X, 1)
    m = X.shape[0]
    K = gram_matrix(kernel, X)
    cap = 1.0 / (nu * m)
    problem = QpProblem(K, np.zeros(m), np.ones((1, m)), np.ones(1),
                        np.zeros(m), np.full(m, cap))
    sol = solve(problem, solver or SolverConfig())
    alpha = np.clip(sol.z, 0.0, cap)
    s = K @ alpha
    flags = set()
    if sol.polished or not sol.converged:
        zero, free, high = _band(alpha, cap, bound_tolerance)
    else:
        free = _free_by_multipliers(sol, problem.lower, problem.upper)
        zero = ~free & (alpha <= 0.5 * cap)
        high = ~free & ~zero
    if free.any():
        if sol.converged and not sol.polished:
            rho = float(sol.equality_multipliers[0])
        else:
            rho = float(s[free].mean())
    else:
        flags.add(OFFSET_FALLBACK)
        lo = s[high].max() if high.any() else None
        hi = s[zero].min() if zero.any() else None
        if lo is not None and hi is not None:
            rho = float(0.5 * (lo + hi))
        else:
            rho = float(lo if lo is not None else hi)
    model = OcsvmModel(X, alpha, rho, nu, kernel, frozenset(flags),
                       converged=sol.converged, objective=sol.objective,
                       iterations=sol.iterations)
    if not sol.converged:
        raise NonConvergenceError(f"one-class SVM QP did not converge ({sol.status})",
                                  model=model, solution=sol)
    return model


def ocsvm_predict(model: OcsvmModel, x) -> int:
    """+1 when the score exceeds ``rho`` strictly, -1 otherwise."""
    s = score(model, x)
    return 1 if np.sign(s - model.rho) > 0 else -1


@dataclass(frozen=True)
class KktCaseReport:
    """Per-sample KKT case labels of a slab model.

    `xi` and `xi_bar` are the slacks implied by the offsets,
    ``max(0, rho1 - s_i)`` and ``max(0, s_i - rho2)``.
    """

    labels: tuple
    counts: dict
    scores: np.ndarray
    xi: np.ndarray
    xi_bar: np.ndarray

    @property
    def invalid(self):
        return self.counts[INVALID]


def classify_kkt_cases(model: SlabModel, gram=None) -> KktCaseReport:
    """Label each training sample by the state of its two dual variables.

    ============================  =====================
    alpha_i, alpha_bar_i          label
    ============================  =====================
    both zero                     interior_slab
    alpha inside, alpha_bar zero  on_lower_plane
    alpha zero, alpha_bar inside  on_upper_plane
    alpha capped, alpha_bar zero  below_slab_outlier
    alpha zero, alpha_bar capped  above_slab_outlier
    both nonzero                  invalid
    ============================  =====================
    """
    K = gram_matrix(model.kernel, model.training_rows) if gram is None else _as_gram(gram)
    m = model.m
    if K.shape[0] != m:
        raise SlabError("gram does not match the model's training size")
    cap1, cap2 = model.train_config.caps(m)
    tol = model.train_config.sv_bound_tolerance
    z1, f1, c1 = _band(model.alpha, cap1, tol)
    z2, f2, c2 = _band(model.alpha_bar, cap2, tol)
    labels = np.full(m, INVALID, dtype=object)
    labels[z1 & z2] = INTERIOR_SLAB
    labels[f1 & z2] = ON_LOWER_PLANE
    labels[z1 & f2] = ON_UPPER_PLANE
    labels[c1 & z2] = BELOW_SLAB_OUTLIER
    labels[z1 & c2] = ABOVE_SLAB_OUTLIER
    s = K @ (model.alpha - model.alpha_bar)
    counts = Counter(labels.tolist())
    return KktCaseReport(
        labels=tuple(labels.tolist()),
        counts={name: counts.get(name, 0) for name in CASE_LABELS},
        scores=s,
        xi=np.maximum(0.0, model.rho1 - s),
        xi_bar=np.maximum(0.0, s - model.rho2),
    )


# ---------------------------------------------------------------------------
# model files

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _fmt(x):
    return repr(float(x))


def _kernel_line(kernel):
    if kernel.family == "rbf":
        return f"kernel rbf gamma {_fmt(kernel.gamma)}"
    return f"kernel {kernel.family}"


def dumps_model(model) -> bytes:
    """Serialize a model to the line-oriented text format."""
    lines = []
    if isinstance(model, SlabModel):
        cfg = model.train_config
        lines.append(f"{SLAB_HEADER} {FORMAT_VERSION}")
        lines.append(_kernel_line(model.kernel))
        lines.append(f"params nu1 {_fmt(cfg.nu1)} nu2 {_fmt(cfg.nu2)} epsilon {_fmt(cfg.epsilon)}")
        lines.append(f"offsets rho1 {_fmt(model.rho1)} rho2 {_fmt(model.rho2)}")
        duals = np.column_stack([model.alpha, model.alpha_bar])
    elif isinstance(model, OcsvmModel):
        lines.append(f"{OCSVM_HEADER} {FORMAT_VERSION}")
        lines.append(_kernel_line(model.kernel))
        lines.append(f"params nu {_fmt(model.nu)}")
        lines.append(f"offsets rho {_fmt(model.rho)}")
        duals = model.alpha[:, None]
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    lines.append(f"m {model.m} dim {model.dim}")
    for d, row in zip(duals, model.training_rows):
        lines.append("sv " + " ".join(_fmt(v) for v in (*d, *row)))
    body = ("\n".join(lines) + "\n").encode("utf-8")
    return body + f"end {fnv1a64(body):016x}\n".encode("utf-8")


def save_model(model, destination=None) -> bytes:
    """Serialize `model` and optionally write it.

    `destination` may be a path or a binary file object. The serialized
    bytes are returned either way.
    """
    data = dumps_model(model)
    if destination is None:
        return data
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    else:
        destination.write(data)
    return data


def _read_source(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    data = source.read()
    return data.encode("utf-8") if isinstance(data, str) else data


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise MalformedModelError(f"line {lineno}: {exc}") from None


def _keyed(line, lineno, head, keys):
    """Parse ``head key1 v1 key2 v2 ...`` with the given keys in order."""
    tok = line.split()
    if len(tok) != 1 + 2 * len(keys) or tok[0] != head or tok[1::2] != list(keys):
        expected = " ".join([head] + [k + " <value>" for k in keys])
        raise MalformedModelError(f"line {lineno}: expected {expected!r}")
    return _floats(tok[2::2], lineno)


def loads_model(data: bytes):
    """Parse model bytes produced by :func:`dumps_model`."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedModelError(f"not UTF-8 text: {exc}") from None
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise MalformedModelError("empty model file")
    header = lines[0].split()
    if len(header) != 2 or header[0] not in (SLAB_HEADER, OCSVM_HEADER):
        raise MalformedModelError(f"line 1: unknown header {lines[0]!r}")
    if header[1] != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported model version {header[1]!r} (expected {FORMAT_VERSION})")
    slab = header[0] == SLAB_HEADER

    end_idx = next((i for i, ln in enumerate(lines) if ln.startswith("end")), None)
    if end_idx is None:
        raise MalformedModelError("missing end line (file truncated?)")
    end_tok = lines[end_idx].split()
    if len(end_tok) != 2 or end_tok[0] != "end" or len(end_tok[1]) != 16:
        raise MalformedModelError(f"line {end_idx + 1}: malformed end line (file truncated?)")
    if any(ln.strip() for ln in lines[end_idx + 1:]):
        raise MalformedModelError("content after end line")
    body = ("\n".join(lines[:end_idx]) + "\n").encode("utf-8")
    try:
        stored = int(end_tok[1], 16)
    except ValueError:
        raise MalformedModelError("checksum is not hexadecimal") from None
    if fnv1a64(body) != stored:
        raise ChecksumError("checksum mismatch")

    if end_idx < 5:
        raise MalformedModelError("model file is missing header lines")
    ktok = lines[1].split()
    try:
        if len(ktok) == 4 and ktok[:3] == ["kernel", "rbf", "gamma"]:
            kernel = KernelSpec("rbf", _floats([ktok[3]], 2)[0])
        elif len(ktok) == 2 and ktok[0] == "kernel":
            kernel = KernelSpec(ktok[1])
        else:
            raise MalformedModelError(f"line 2: malformed kernel line {lines[1]!r}")
    except ValueError as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise MalformedModelError(f"line 2: {exc}") from None
    if slab:
        nu1, nu2, eps = _keyed(lines[2], 3, "params", ("nu1", "nu2", "epsilon"))
        rho1, rho2 = _keyed(lines[3], 4, "offsets", ("rho1", "rho2"))
    else:
        (nu,) = _keyed(lines[2], 3, "params", ("nu",))
        (rho,) = _keyed(lines[3], 4, "offsets", ("rho",))
    mtok = lines[4].split()
    if len(mtok) != 4 or mtok[0] != "m" or mtok[2] != "dim":
        raise MalformedModelError("line 5: expected m <count> dim <d>")
    try:
        m, dim = int(mtok[1]), int(mtok[3])
    except ValueError:
        raise MalformedModelError("line 5: m and dim must be integers") from None
    if m < 1 or dim < 1:
        raise MalformedModelError("line 5: m and dim must be positive")
    sv_lines = lines[5:end_idx]
    if len(sv_lines) != m:
        raise MalformedModelError(f"expected {m} sv lines, found {len(sv_lines)}")
    ndual = 2 if slab else 1
    rows = np.empty((m, ndual + dim))
    for i, ln in enumerate(sv_lines):
        tok = ln.split()
        if not tok or tok[0] != "sv" or len(tok) != 1 + ndual + dim:
            raise MalformedModelError(f"line {6 + i}: expected sv line with {ndual + dim} values")
        rows[i] = _floats(tok[1:], 6 + i)
    X = rows[:, ndual:]
    try:
        if slab:
            cfg = SlabTrainConfig(nu1=nu1, nu2=nu2, epsilon=eps, kernel=kernel)
            alpha, alpha_bar = rows[:, 0].copy(), rows[:, 1].copy()
            cap1, cap2 = cfg.caps(m)
            _, f1, _ = _band(alpha, cap1, cfg.sv_bound_tolerance)
            _, f2, _ = _band(alpha_bar, cap2, cfg.sv_bound_tolerance)
            return SlabModel(X, alpha, alpha_bar, rho1, rho2, kernel, cfg,
                             int(f1.sum()), int(f2.sum()))
        return OcsvmModel(X, rows[:, 0].copy(), rho, _check_nu(nu, "nu"), kernel)
    except SlabError as exc:
        raise MalformedModelError(str(exc)) from None


def load_model(source):
    """Load a model from a path, bytes, or a file object."""
    return loads_model(_read_source(source))
