"""Haagerup cocycle, its harmonic projection and radial growth profiles.

Group elements g are represented by the vertex ``y = g·x0`` they move the
basepoint to; every quantity here depends on g only through that vertex.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .edgespace import EdgeFunction, chi, inner_edge
from .exceptions import DomainError, ParameterError, ReliabilityError
from .green import (ProjectionResult, grad_green_delta, green_gradient, project,
                    q_chi_norm_sq)
from .tree import ROOT, RegularTree, Vertex, distance, path_vertex


def haagerup(tree: RegularTree, y: Vertex, basepoint: Vertex = ROOT) -> EdgeFunction:
    """b(g) = χ_{x0 → g x0}."""
    return chi(tree, basepoint, y)


def projected_cocycle(tree: RegularTree, y: Vertex, tol: float, basepoint: Vertex = ROOT,
                      max_radius: int | None = None) -> ProjectionResult:
    """Split of the Haagerup cocycle at ``y``; the harmonic part is b̃(g)."""
    return project(haagerup(tree, y, basepoint), tol, max_radius=max_radius)


def projected_norm_sq(tree: RegularTree, n: int):
    """Closed form ‖b̃(g)‖² = |g| + (2q/(q²−1))(q^(−|g|) − 1)."""
    return n - q_chi_norm_sq(tree, n)


@dataclass(frozen=True)
class RadialProfile:
    """φ(0), …, φ(n_max): squared norms of an equivariant map along spheres."""

    q: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ParameterError("empty profile")
        if self.values[0] != 0:
            raise ParameterError("profile must satisfy φ(0) = 0")
        if any(v < 0 for v in self.values):
            raise ParameterError("profile values must be nonnegative")

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class GrowthBound:
    """Constants of the bound ‖F(x)‖² ≤ A·d − B + B·q^(−d), with w = ‖F(x1)‖²."""

    q: int
    w: float

    @property
    def A(self) -> float:
        return (self.q + 1) * self.w / (self.q - 1)

    @property
    def B(self) -> float:
        return 2 * self.q * self.w / (self.q - 1) ** 2

    def __call__(self, n: int) -> float:
        return self.A * n - self.B + self.B * self.q ** -n


def optimal_profile(tree: RegularTree, n_max: int, w: float) -> RadialProfile:
    """Profile attaining the growth bound: φ(n) = A n − B + B q^(−n)."""
    if not w > 0:
        raise ParameterError(f"w must be > 0, got {w}")
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    bound = GrowthBound(tree.q, w)
    values = [0.0] + [bound(n) for n in range(1, n_max + 1)]
    return RadialProfile(tree.q, values)


def haagerup_profile(tree: RegularTree, n_max: int) -> RadialProfile:
    """Measured ‖χ_{x0→x_n}‖² along a ray."""
    return RadialProfile(tree.q, [haagerup(tree, path_vertex(tree, n)).norm_sq()
                                  for n in range(n_max + 1)])


def measured_profile(tree: RegularTree, n_max: int, tol: float,
                     max_radius: int | None = None) -> RadialProfile:
    """Measured ‖b̃(x_n)‖² along a ray, x_n = (0, …, 0)."""
    values = [0.0]
    for n in range(1, n_max + 1):
        res = projected_cocycle(tree, path_vertex(tree, n), tol, max_radius=max_radius)
        values.append(res.harmonic_part.norm_sq())
    return RadialProfile(tree.q, values)


def recurrence_residual(profile: RadialProfile, n: int) -> float:
    """q/(q+1)·φ(n+1) − φ(n) + 1/(q+1)·φ(n−1) − φ(1).

    This is 2⟨ℒF(x_n), F(x_n)⟩, nonpositive for genuine equivariant maps and
    zero exactly in the harmonic case.
    """
    if not 1 <= n <= profile.n_max - 1:
        raise IndexError(f"n must lie in 1..{profile.n_max - 1}, got {n}")
    q, phi = profile.q, profile.values
    return q / (q + 1) * phi[n + 1] - phi[n] + phi[n - 1] / (q + 1) - phi[1]


@dataclass(frozen=True)
class BoundRow:
    n: int
    phi: float
    bound: float
    slack: float
    violated: bool


def growth_bound_check(profile: RadialProfile, atol: float = 1e-10) -> list[BoundRow]:
    """Slack A·n − B + B·q^(−n) − φ(n) at each n; negative slack beyond ``atol`` is flagged."""
    if profile.n_max < 1:
        raise ParameterError("profile needs n_max >= 1")
    bound = GrowthBound(profile.q, profile[1])
    rows = []
    for n, phi in enumerate(profile.values):
        b = bound(n)
        rows.append(BoundRow(n, phi, b, b - phi, b - phi < -atol))
    return rows


def perturbed_profile(tree: RegularTree, n_max: int, w: float, r_terms: Sequence[float]) -> RadialProfile:
    """Solve the radial recurrence forward with prescribed terms R_F(1), R_F(2), ….

    φ(0) = 0, φ(1) = w and
    φ(n+1) = ((q+1)/q)·(φ(1) + R_F(n) + φ(n) − φ(n−1)/(q+1)).
    """
    q = tree.q
    phi = [0.0, w]
    for n in range(1, n_max):
        phi.append((q + 1) / q * (w + r_terms[n - 1] + phi[n] - phi[n - 1] / (q + 1)))
    return RadialProfile(q, phi[: n_max + 1])


# -- virtual coboundaries ---------------------------------------------------------
@dataclass(frozen=True)
class VirtualPotential:
    """Potentials whose coboundaries give b, b' and b̃, truncated to a ball.

    ``f = −½ ∇d(·, x0)`` (so ``π(g)f − f = χ_{x0→gx0}``),
    ``f_prime = ∇Gδ_{x0}/(q+1)`` (so ``π(g)f' − f' = Qχ_{x0→gx0}``) and
    ``f_tilde = f − f_prime``, whose divergence is (q−1)/(2(q+1)) everywhere.
    ``tail_bound`` is the squared norm of ``f_prime`` outside the ball.
    """

    f: EdgeFunction
    f_prime: EdgeFunction
    f_tilde: EdgeFunction
    basepoint: Vertex
    support_radius: int
    tail_bound: float


def distance_potential(tree: RegularTree, basepoint: Vertex, domain_center: Vertex,
                       radius: int) -> EdgeFunction:
    """−½ ∇d(·, basepoint) on the edges of ``ball(domain_center, radius)``."""
    entries = {}
    for e in tree.edges_within(tree.ball(domain_center, radius)):
        step = distance(basepoint, e.target) - distance(basepoint, e.source)
        entries[e.target] = -0.5 * step
    return EdgeFunction(tree, entries)


def virtual_potentials(tree: RegularTree, support_radius: int, basepoint: Vertex = ROOT) -> VirtualPotential:
    if support_radius < 1:
        raise ParameterError("support_radius must be >= 1")
    q = tree.q
    f = distance_potential(tree, basepoint, basepoint, support_radius)
    f_prime = grad_green_delta(tree, basepoint, support_radius) / (q + 1)
    # edges at distance k >= R from the basepoint: (q+1) q^k of them, entries q^-k/(q+1)
    tail = q ** (1 - support_radius) / ((q + 1) * (q - 1))
    return VirtualPotential(f, f_prime, f - f_prime, basepoint, support_radius, tail)


def coboundary_difference(tree: RegularTree, pot_kind: str, y: Vertex, tol: float,
                          support_radius: int | None = None, basepoint: Vertex = ROOT,
                          max_radius: int | None = None) -> EdgeFunction:
    """Potential rebased at ``y`` minus the potential based at the basepoint.

    ``f`` is handled on ``ball(basepoint, support_radius)`` (default: just large
    enough to contain ``y``); outside the geodesic the two distance potentials
    agree, so the difference is exact.  The Green potential ``f_prime`` is
    evaluated on the whole tree with Green-kernel tails truncated at ``tol``.
    """
    if pot_kind not in ("f", "f_prime", "f_tilde"):
        raise ParameterError(f"unknown potential kind {pot_kind!r}")
    tree.validate(y)
    n = distance(basepoint, y)
    radius = n if support_radius is None else support_radius
    if n > radius:
        raise ReliabilityError(f"{y} lies outside the potential's support ball", n)

    def diff_f():
        return (distance_potential(tree, y, basepoint, radius)
                - distance_potential(tree, basepoint, basepoint, radius))

    def diff_f_prime():
        # π(g)f' − f' = ∇G(δ_y − δ_x0)/(q+1); the Green operator is linear, so the
        # two potentials are differenced at the level of their sources
        s = 1 / (tree.q + 1)
        h = {y: s, basepoint: -s} if y != basepoint else {}
        diff, _, _ = green_gradient(tree, h, tol, extra_core=tree.geodesic(basepoint, y),
                                    max_radius=max_radius)
        return diff

    if pot_kind == "f":
        return diff_f()
    if pot_kind == "f_prime":
        return diff_f_prime()
    return diff_f() - diff_f_prime()


# -- harmonicity ---------------------------------------------------------------------
def laplace_norm_identity(tree: RegularTree, F: Mapping[Vertex, EdgeFunction], x: Vertex):
    """Both sides of ℒ(‖F‖²)(x) = ‖∇_x F‖² + 2⟨ℒF(x), F(x)⟩.

    ``F`` must be defined at ``x`` and at every neighbour of ``x``.
    """
    nbrs = tree.neighbors(x)
    missing = [v for v in [x] + nbrs if v not in F]
    if missing:
        raise DomainError(f"F is undefined at {len(missing)} required vertices")
    deg = tree.degree(x)
    fx = F[x]
    lhs = sum(F[y].norm_sq() for y in nbrs) / deg - fx.norm_sq()
    grad_sq = sum((fx - F[y]).norm_sq() for y in nbrs) / deg
    lap = EdgeFunction.zero(tree)
    for y in nbrs:
        lap = lap + F[y]
    lap = lap / deg - fx
    rhs = grad_sq + 2 * inner_edge(lap, fx)
    return lhs, rhs


def basepoint_harmonicity(tree: RegularTree, tol: float, basepoint: Vertex = ROOT) -> float:
    """‖mean of b̃ over the neighbours of the basepoint‖ (zero for a harmonic cocycle)."""
    total = EdgeFunction.zero(tree)
    nbrs = tree.neighbors(basepoint)
    for y in nbrs:
        total = total + projected_cocycle(tree, y, tol, basepoint).harmonic_part
    return (total / len(nbrs)).norm_sq() ** 0.5

