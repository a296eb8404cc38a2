"""Conditionally-negative-type kernels on finite vertex sets.

A kernel Ψ with zero diagonal is conditionally of negative type (CND) when
Σ αᵢαⱼΨᵢⱼ ≤ 0 for all α with Σα = 0.  Writing J for the centering projector,
this is equivalent to −½·JΨJ being positive semidefinite, and that matrix is
then the Gram matrix of a point configuration realising Ψ as squared
distances.  :class:`GNSEmbedding` exposes the factorisation with the usual
estimator interface, so it can sit in a :class:`sklearn.pipeline.Pipeline`
behind any step that produces a precomputed kernel.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ParameterError, PreconditionError, ValidationError
from .green import q_chi_norm_sq
from .tree import BallAutomorphism, RegularTree, Vertex, distance, edge_flip

DEFAULT_TOL = 1e-10


def check_kernel_matrix(values, atol: float = 0.0) -> np.ndarray:
    """Validate a square, symmetric, zero-diagonal kernel matrix."""
    try:
        arr = check_array(values, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                          ensure_min_features=1)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"kernel matrix must be square, got shape {arr.shape}")
    asym = np.max(np.abs(arr - arr.T))
    if asym > atol:
        raise ValidationError(f"kernel matrix is not symmetric (max asymmetry {asym:.3g})")
    diag = np.max(np.abs(np.diag(arr)))
    if diag > atol:
        raise ValidationError(f"kernel matrix has nonzero diagonal (max |Ψ(x,x)| = {diag:.3g})")
    return arr


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    points: tuple
    values: np.ndarray

    def __post_init__(self):
        arr = check_kernel_matrix(self.values)
        if len(self.points) != arr.shape[0]:
            raise ValidationError(f"{len(self.points)} points but a {arr.shape[0]}x{arr.shape[0]} matrix")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.points)

    def scaled(self, c: float) -> "KernelMatrix":
        return KernelMatrix(self.points, c * self.values)

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        if self.points != other.points:
            raise ValidationError("kernels live on different point sets")
        return KernelMatrix(self.points, self.values + other.values)


def _values(K) -> np.ndarray:
    return K.values if isinstance(K, KernelMatrix) else check_kernel_matrix(K)


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def centered_gram(values: np.ndarray) -> np.ndarray:
    """−½·JΨJ."""
    J = centering_matrix(values.shape[0])
    G = -0.5 * J @ values @ J
    return 0.5 * (G + G.T)


def quadratic_form(values: np.ndarray, alpha: np.ndarray) -> float:
    return float(alpha @ values @ alpha)


@dataclass(frozen=True, eq=False)
class CndReport:
    is_cnd: bool
    min_centered_eigenvalue: float
    witness: np.ndarray | None = None
    witness_value: float | None = None
    tol: float = DEFAULT_TOL

    def verify_witness(self, values) -> bool:
        """Re-evaluate the certificate: Σα = 0 and αᵀΨα > 0."""
        if self.witness is None:
            return False
        a = self.witness
        return abs(a.sum()) <= 1e-9 * np.abs(a).sum() and quadratic_form(np.asarray(values, float), a) > 0


def cnd_check(K, tol: float = DEFAULT_TOL) -> CndReport:
    """Decide the CND property via the spectrum of the centered matrix."""
    if not tol > 0:
        raise ParameterError("tol must be > 0")
    values = _values(K)
    n = values.shape[0]
    if n == 1:
        return CndReport(True, 0.0, tol=tol)
    evals, evecs = np.linalg.eigh(centered_gram(values))
    lam = float(evals[0])
    if lam >= -tol:
        return CndReport(True, lam, tol=tol)
    alpha = evecs[:, 0] - evecs[:, 0].mean()
    return CndReport(False, lam, alpha, quadratic_form(values, alpha), tol=tol)


def sampled_max_form(values, n_samples: int = 1000, seed=0) -> float:
    """Largest αᵀΨα over random unit α with Σα = 0 (brute-force oracle)."""
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_samples, values.shape[0]))
    a -= a.mean(axis=1, keepdims=True)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return float(np.max(np.einsum("si,ij,sj->s", a, values, a)))


@dataclass(frozen=True, eq=False)
class GnsEmbedding:
    vectors: np.ndarray
    reconstruction_error: float
    eigenvalues: np.ndarray


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    return sq[:, None] + sq[None, :] - 2 * X @ X.T


class GNSEmbedding(TransformerMixin, BaseEstimator):
    """Finite GNS embedding of a precomputed CND kernel.

    Parameters
    ----------
    tol : float
        Eigenvalues of the centered matrix above ``-tol`` are accepted (and
        clipped to zero); anything lower means the kernel is not CND.
    n_components : int or None
        Keep only the leading components.  ``None`` keeps every component
        above rounding level.

    Attributes
    ----------
    embedding_ : ndarray of shape (n_samples, n_components)
        Rows are points whose squared distances reproduce the kernel.
    eigenvalues_ : ndarray
    components_ : ndarray of shape (n_samples, n_components)
    reconstruction_error_ : float
        Max over pairs of |‖F_i − F_j‖² − Ψ_ij|.
    report_ : CndReport
    """

    def __init__(self, tol=DEFAULT_TOL, n_components=None):
        self.tol = tol
        self.n_components = n_components

    def fit(self, X, y=None):
        values = check_kernel_matrix(X)
        report = cnd_check(values, self.tol)
        if not report.is_cnd:
            raise PreconditionError(
                f"kernel is not conditionally of negative type "
                f"(min centered eigenvalue {report.min_centered_eigenvalue:.3g})", report)
        evals, evecs = np.linalg.eigh(centered_gram(values))
        order = np.argsort(evals)[::-1]
        evals, evecs = np.clip(evals[order], 0.0, None), evecs[:, order]
        # numerical rank: rounding-level eigenvalues would blow up in transform
        keep = evals > 10 * np.finfo(float).eps * len(evals) * max(evals[0], 1.0)
        if self.n_components is not None:
            keep &= np.arange(len(evals)) < self.n_components
        if not keep.any():
            keep[0] = True
        self.eigenvalues_ = evals[keep]
        self.components_ = evecs[:, keep]
        self.embedding_ = self.components_ * np.sqrt(self.eigenvalues_)
        self.reconstruction_error_ = float(np.max(np.abs(_pairwise_sq(self.embedding_) - values)))
        self.report_ = report
        self._train_mean = values.mean(axis=0)
        self._train_total = values.mean()
        self.n_features_in_ = values.shape[0]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

    def transform(self, X):
        """Embed new points from their kernel values against the training points.

        ``X[i, j]`` is Ψ(new_i, train_j).  Uses the out-of-sample Gram row
        zᵢ·x_j = −½(Ψᵢⱼ − mean_j Ψᵢⱼ − Ψ̄_j + mean Ψ̄), Ψ̄ the training column means.
        """
        check_is_fitted(self, "embedding_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} kernel columns, got {X.shape[1]}")
        gram = -0.5 * (X - X.mean(axis=1, keepdims=True) - self._train_mean[None, :] + self._train_total)
        lam = self.eigenvalues_
        scale = np.divide(1.0, np.sqrt(lam), out=np.zeros_like(lam), where=lam > 0)
        return gram @ self.components_ * scale


def gns_embed(K, tol: float = DEFAULT_TOL) -> GnsEmbedding:
    est = GNSEmbedding(tol=tol).fit(_values(K))
    return GnsEmbedding(est.embedding_, est.reconstruction_error_, est.eigenvalues_)


# -- kernels on the tree -------------------------------------------------------------
def radial_kernel(tree: RegularTree, points: Sequence[Vertex], fn: Callable[[int], float]) -> KernelMatrix:
    pts = [tree.validate(p) for p in points]
    n = len(pts)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = fn(distance(pts[i], pts[j]))
    return KernelMatrix(tuple(pts), values)


def distance_kernel(tree: RegularTree, points: Sequence[Vertex]) -> KernelMatrix:
    return radial_kernel(tree, points, float)


def pure_unbounded_psi(tree: RegularTree, n: int, C: float = 1.0) -> float:
    """C(n + (2q/(q²−1))(q^(−n) − 1)), the unbounded pure negative-type function at |g| = n."""
    if not C > 0:
        raise ParameterError(f"C must be > 0, got {C}")
    if n < 0:
        raise ParameterError("n must be >= 0")
    return C * (n - q_chi_norm_sq(tree, n))


def pure_kernel(tree: RegularTree, points: Sequence[Vertex], C: float = 1.0) -> KernelMatrix:
    return radial_kernel(tree, points, lambda d: pure_unbounded_psi(tree, d, C))


def _check_psi(tree, psi, points):
    for p in points:
        if p not in psi:
            raise ValidationError(f"ψ is undefined at {p}")
        v = psi[p]
        if not 0 <= v <= 1 / tree.degree(p):
            raise ValidationError(f"ψ({p}) = {v} outside [0, 1/deg]")


def valette_kernel(tree: RegularTree, psi: Mapping[Vertex, float], points: Sequence[Vertex]) -> KernelMatrix:
    """Ψ(x, y) = d(x, y) − (ψ(x) + ψ(y))/2 off the diagonal, 0 on it."""
    pts = [tree.validate(p) for p in points]
    _check_psi(tree, psi, pts)
    n = len(pts)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = distance(pts[i], pts[j]) - (psi[pts[i]] + psi[pts[j]]) / 2
    return KernelMatrix(tuple(pts), values)


@dataclass(frozen=True)
class InvarianceReport:
    defect: float
    constancy_defect: float
    n_maps: int


def _local_isometries(tree: RegularTree, domain: set, depth: int):
    """Isometries between finite subsets of ``domain`` used as a proxy for the group.

    * For each center with ``ball(center, r) ⊆ domain`` (r ≥ 1, maximal):
      compositions of up to ``depth`` transpositions of outward slots at the
      center and at its neighbours.
    * For each edge, the flip exchanging its endpoints on the largest
      symmetric neighbourhood inside ``domain``.  Center-fixing maps preserve
      the parity of the distance to the center, so these are needed to move
      between the two classes of the bipartition.
    """
    maps = []
    for c in sorted(domain, key=lambda v: (len(v), v)):
        r = 0
        while r < 64 and all(v in domain for v in tree.sphere(c, r + 1)):
            r += 1
        if r < 1:
            continue
        gens = []
        for w in [c] + tree.neighbors(c):
            if distance(c, w) >= r:
                continue
            k = len(tree.outward_neighbors(c, w))
            for i, j in itertools.combinations(range(k), 2):
                gens.append(BallAutomorphism.transposition(tree, c, r, w, i, j))
        words = list(gens)
        level = list(gens)
        for _ in range(depth - 1):
            level = [g.compose(h) for g in level for h in gens]
            words.extend(level)
        maps.extend(a.mapping for a in words)
    for v in sorted(domain, key=lambda v: (len(v), v)):
        if not v or v[:-1] not in domain:
            continue
        u = v[:-1]
        r = 0
        while r < 64:
            m = edge_flip(tree, u, v, r + 1)
            if not all(x in domain for x in m):
                break
            r += 1
        maps.append(edge_flip(tree, u, v, r))
    return maps


def invariance_defect(tree: RegularTree, psi: Mapping[Vertex, float], domain, depth: int = 3) -> InvarianceReport:
    """Max |Ψ(ax, ay) − Ψ(x, y)| for the Valette kernel of ``psi`` over local isometries.

    A nonzero defect certifies that the kernel is not invariant; the
    constancy defect max |ψ(x) − ψ(y)| is reported alongside.
    """
    dom = set(domain)
    if not dom:
        raise ParameterError("domain must be nonempty")
    vals = [psi[v] for v in dom]
    constancy = max(vals) - min(vals)
    worst = 0.0
    maps = _local_isometries(tree, dom, depth)
    for m in maps:
        src = list(m)
        a = np.array([psi[x] for x in src])
        b = np.array([psi[m[x]] for x in src])
        # d is preserved, so only the ψ terms can move; diagonal pairs are excluded
        diff = np.abs((b[:, None] + b[None, :]) - (a[:, None] + a[None, :])) / 2
        np.fill_diagonal(diff, 0.0)
        if diff.size:
            worst = max(worst, float(diff.max()))
    return InvarianceReport(worst, float(constancy), len(maps))


def haagerup_reducibility_gap(tree: RegularTree, d: int) -> float:
    """‖Qχ‖² at distance ``d``: the non-harmonic part that splits the distance function."""
    if d < 1:
        raise ParameterError("d must be >= 1")
    return q_chi_norm_sq(tree, d)
