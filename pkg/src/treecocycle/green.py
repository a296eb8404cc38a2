"""Green kernel of the regular tree and the gradient projection Q = ∇G∇*."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .edgespace import EdgeFunction, divergence
from .exceptions import DomainError, ParameterError, ResourceError
from .tree import ROOT, RegularTree, Vertex, distance, sort_vertices


def green_value(tree: RegularTree, x: Vertex, y: Vertex, exact: bool = False):
    """G(x, y) = q^(1 - d(x, y)) / (q - 1).

    With ``exact=True`` the value is returned as a :class:`~fractions.Fraction`.
    """
    q, d = tree.q, tree.distance(x, y)
    if exact:
        return Fraction(q, q - 1) / Fraction(q) ** d
    return q ** (1 - d) / (q - 1)


def _edge_green_gradient(q: int, x: Vertex, source: Vertex, target: Vertex) -> float:
    """(∇Gδ_x)(source → target) via the case split on which endpoint is nearer x."""
    ds, dt = distance(x, source), distance(x, target)
    if ds < dt:
        return -(q ** -ds)
    return q ** -dt


def grad_green_delta(tree: RegularTree, x: Vertex, support_radius: int) -> EdgeFunction:
    """∇Gδ_x on the edges of ``ball(x, support_radius)``.

    Entries have magnitude q^(-d(x, e)), negative on edges pointing away from
    ``x``.
    """
    if support_radius < 0:
        raise ParameterError("support_radius must be >= 0")
    q = tree.q
    entries = {e.target: _edge_green_gradient(q, x, e.source, e.target)
               for e in tree.edges_within(tree.ball(x, support_radius))}
    return EdgeFunction(tree, entries)


def green_gradient(tree: RegularTree, h: Mapping[Vertex, float], tol: float,
                   extra_core: Iterable[Vertex] = (), max_radius: int | None = None):
    """∇G h for finitely supported ``h``, truncated with an explicit error bound.

    The core is the subtree spanned by ``supp h``, ``extra_core`` and the root;
    its edges and the edges leaving it are stored explicitly.  Every branch
    hanging off the core avoids ``supp h``, so on edges at generation ``k``
    below a branch root ``c`` all entries coincide and equal
    ``-Σ_y h(y) q^-(d(y, c) + k)``; ``L`` such generations are kept per branch.

    Returns ``(gradient, tail_bound, support_radius)`` where ``tail_bound``
    bounds the squared norm of everything discarded.  The bound comes from
    ``|value| ≤ A_c q^-k`` with ``A_c = Σ |h(y)| q^-d(y, c)`` and the edge
    count ``q^(k+1)`` per generation, giving ``A_c² q^(2-L) / (q-1)`` per branch.
    """
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    q = tree.q
    h = {v: x for v, x in h.items() if x != 0}
    core = tree.hull(list(h) + list(extra_core) + [ROOT])
    entries: dict[Vertex, float] = {}
    branch_roots = []
    for w in sort_vertices(core):
        if w:
            entries[w] = sum(c * _edge_green_gradient(q, y, w[:-1], w) for y, c in h.items())
        for child in tree.children(w):
            if child not in core:
                branch_roots.append(child)
                entries[child] = sum(c * _edge_green_gradient(q, y, w, child) for y, c in h.items())

    dists = {c: [(distance(y, c), x) for y, x in h.items()] for c in branch_roots}
    weight = sum(sum(abs(x) * q ** -d for d, x in dists[c]) ** 2 for c in branch_roots)
    levels = 0
    tail = weight * q ** 2 / (q - 1)
    while tail > tol:
        levels += 1
        tail = weight * q ** (2 - levels) / (q - 1)
    tails = {}
    for c in branch_roots:
        # generation k edges sit at distance d(y, c) + k from every y in supp h
        tails[c] = [-sum(x * q ** -(d + k) for d, x in dists[c]) for k in range(levels)]
    grad = EdgeFunction(tree, entries, tails)
    radius = grad.depth()
    if max_radius is not None and radius > max_radius:
        raise ResourceError(f"truncation for tol={tol:g} exceeds max_radius={max_radius}", radius)
    return grad, tail, radius


@dataclass(frozen=True)
class ProjectionResult:
    """Truncated orthogonal split ξ = Qξ + (1 − Q)ξ.

    ``tail_bound`` bounds the squared norm of the part of Qξ that was
    discarded; ``support_radius`` is the radius about the root of the ball
    containing every represented edge.
    """

    gradient_part: EdgeFunction
    harmonic_part: EdgeFunction
    tail_bound: float
    support_radius: int


def project(xi: EdgeFunction, tol: float, max_radius: int | None = None) -> ProjectionResult:
    """Project a finitely supported ξ onto the closure of im ∇ and its complement."""
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    if not xi.is_finite:
        raise DomainError("project expects a finitely supported edge function")
    h = divergence(xi)
    grad, tail, radius = green_gradient(xi.tree, h.entries, tol,
                                        extra_core=xi.support_vertices(), max_radius=max_radius)
    return ProjectionResult(grad, xi - grad, tail, radius)


def q_chi_norm_sq(tree: RegularTree, d: int, exact: bool = False):
    """‖Qχ_{x→y}‖² = (2q/(q²−1))(1 − q^(−d)) for d = d(x, y)."""
    if d < 0:
        raise ParameterError(f"distance must be >= 0, got {d}")
    q = tree.q
    if exact:
        return Fraction(2 * q, q * q - 1) * (1 - Fraction(1, q ** d))
    return 2 * q / (q * q - 1) * (1 - q ** -d)


def p_norm_bound(tree: RegularTree) -> float:
    """Spectral radius 2√q/(q+1) of the simple random walk operator."""
    q = tree.q
    return 2 * math.sqrt(q) / (q + 1)


def p_norm_power_iteration(tree: RegularTree, radius: int, iters: int = 5000,
                           rtol: float = 1e-13) -> float:
    """Largest eigenvalue of P on ``ball(root, radius)`` with absorbing boundary.

    Power iteration on the lazy operator (I + P)/2, which removes the ±λ
    symmetry of the bipartite spectrum.
    """
    verts = tree.ball(ROOT, radius)
    index = {v: i for i, v in enumerate(verts)}
    rows, cols = [], []
    for v in verts:
        for w in tree.neighbors(v):
            j = index.get(w)
            if j is not None:
                rows.append(index[v])
                cols.append(j)
    rows, cols = np.asarray(rows), np.asarray(cols)
    deg = tree.q + 1
    x = np.ones(len(verts))
    lam = 0.0
    for _ in range(iters):
        px = np.zeros_like(x)
        np.add.at(px, rows, x[cols] / deg)
        y = 0.5 * (x + px)
        new = float(np.linalg.norm(y) / np.linalg.norm(x))
        x = y / np.linalg.norm(y)
        if abs(new - lam) <= rtol * new:
            lam = new
            break
        lam = new
    return 2 * lam - 1


def neumann_partial(tree: RegularTree, x: Vertex, y: Vertex, N: int, R: int,
                    center: Vertex = ROOT) -> float:
    """Σ_{n=0}^{N} p^(n)(x, y) for the walk killed on leaving ``ball(center, R)``.

    Walks are enumerated on the quotient by the automorphisms fixing the
    subtree S spanned by ``center``, ``x`` and ``y``: a state is a vertex
    ``z`` of S together with the depth ``k`` in the branches hanging off ``z``.
    The quotient is exact for the transition probabilities, so the result is
    the same as enumerating walks on the full ball.
    """
    if N < 0:
        raise ParameterError("N must be >= 0")
    for v in (x, y):
        if tree.distance(center, v) > R:
            raise DomainError(f"vertex {v} lies outside ball(center, {R})")
    q, deg = tree.q, tree.q + 1
    span = sort_vertices(tree.hull([center, x, y]))
    zi = {z: i for i, z in enumerate(span)}
    depth0 = np.array([distance(center, z) for z in span])
    nz = len(span)
    # mass[i, k]: probability of being at depth k off span[i]
    mass = np.zeros((nz, R + 2))
    mass[zi[x], 0] = 1.0
    nbr_lists = [[zi[w] for w in tree.neighbors(z) if w in zi] for z in span]
    off = np.array([deg - len(nb) for nb in nbr_lists], dtype=float)
    # depth cap per attachment point: walker dies once d(center, .) > R
    cap = R - depth0
    alive = np.arange(R + 2)[None, :] <= cap[:, None]
    total = mass[zi[y], 0]
    for _ in range(N):
        new = np.zeros_like(mass)
        on = mass[:, 0]
        for i, nb in enumerate(nbr_lists):
            for j in nb:
                new[j, 0] += on[i] / deg
        new[:, 1] += on * off / deg
        out = mass[:, 1:-1]
        new[:, 2:] += out * q / deg
        new[:, :-2] += out / deg
        new *= alive
        mass = new
        total += mass[zi[y], 0]
    return float(total)
