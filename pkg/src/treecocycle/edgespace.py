"""Edge and vertex function spaces of the tree, gradient, divergence, Laplacian.

An :class:`EdgeFunction` is an alternating function on oriented edges.  It is
stored on canonical (away-from-root) orientations and sign-flipped on read.
Besides finitely many explicit entries it may carry *branch tails*: for a
non-root vertex ``c``, ``tails[c][k]`` is the common value, oriented away from
the root, on all ``q**(k+1)`` edges at generation ``k`` below ``c``.  Tails
compress the geometrically decaying functions produced by the Green kernel, so
norms and inner products over very deep truncations stay cheap.  Functions
without tails are finitely supported and expose the full operator set.
"""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping

import numpy as np

from .exceptions import DomainError, ParameterError
from .tree import OrientedEdge, RegularTree, Vertex, sort_vertices


def _check_same_tree(a, b):
    if a.tree != b.tree:
        raise ParameterError(f"mismatched trees: q={a.tree.q} and q={b.tree.q}")


class VertexFunction:
    """Finitely supported function in ℓ²(V, deg)."""

    __slots__ = ("tree", "_entries")

    def __init__(self, tree: RegularTree, entries: Mapping[Vertex, float] | None = None):
        self.tree = tree
        self._entries = {v: x for v, x in (entries or {}).items() if x != 0}

    @classmethod
    def delta(cls, tree, x, scale=1):
        return cls(tree, {tree.validate(x): scale})

    @property
    def entries(self) -> dict[Vertex, float]:
        return dict(self._entries)

    def support(self) -> list[Vertex]:
        return sort_vertices(self._entries)

    def __call__(self, x: Vertex) -> float:
        return self._entries.get(x, 0)

    def items(self):
        for v in self.support():
            yield v, self._entries[v]

    def _combine(self, other, alpha, beta):
        _check_same_tree(self, other)
        out = {v: alpha * x for v, x in self._entries.items()}
        for v, x in other._entries.items():
            out[v] = out.get(v, 0) + beta * x
        return VertexFunction(self.tree, out)

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def __neg__(self):
        return VertexFunction(self.tree, {v: -x for v, x in self._entries.items()})

    def __mul__(self, c):
        return VertexFunction(self.tree, {v: c * x for v, x in self._entries.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return VertexFunction(self.tree, {v: x / c for v, x in self._entries.items()})

    def __eq__(self, other):
        if not isinstance(other, VertexFunction):
            return NotImplemented
        return self.tree == other.tree and self._entries == other._entries

    __hash__ = None

    def norm_sq(self):
        return inner_vertex(self, self)

    def max_abs(self):
        return max((abs(x) for x in self._entries.values()), default=0)

    def __repr__(self):
        return f"VertexFunction(q={self.tree.q}, nnz={len(self._entries)})"


class EdgeFunction:
    """Alternating function in ℓ²_alt(E), optionally with branch tails."""

    __slots__ = ("tree", "_entries", "_tails")

    def __init__(self, tree: RegularTree, entries: Mapping[Vertex, float] | None = None,
                 tails: Mapping[Vertex, Iterable[float]] | None = None):
        self.tree = tree
        self._entries = {c: x for c, x in (entries or {}).items() if x != 0}
        self._tails = {}
        for c, levels in (tails or {}).items():
            if not c:
                raise DomainError("a branch tail cannot be rooted at the root")
            t = _trim(levels)
            if t:
                self._tails[c] = t
        if self._tails:
            self._check_nesting()

    def _check_nesting(self):
        for key in list(self._entries) + list(self._tails):
            if self._tail_above(key) is not None:
                raise DomainError("explicit entry or tail nested inside another tail")

    # -- construction ----------------------------------------------------
    @classmethod
    def from_oriented(cls, tree, values: Mapping[tuple, float]):
        """Build from ``{(source, target): value}``; both orientations may appear
        but must agree up to sign."""
        entries = {}
        for (s, t), x in values.items():
            e = tree.oriented_edge(s, t)
            key, x = e.canonical_key, (x if e.points_away_from_root else -x)
            if key in entries and entries[key] != x:
                raise DomainError(f"inconsistent values for edge {key}")
            entries[key] = x
        return cls(tree, entries)

    @classmethod
    def zero(cls, tree):
        return cls(tree)

    # -- inspection ------------------------------------------------------
    @property
    def entries(self) -> dict[Vertex, float]:
        """Explicit entries keyed by the child endpoint (value oriented away from root)."""
        return dict(self._entries)

    @property
    def tails(self) -> dict[Vertex, tuple]:
        return dict(self._tails)

    @property
    def is_finite(self) -> bool:
        return not self._tails

    def edges(self) -> Iterator[tuple[OrientedEdge, float]]:
        """Explicit entries as ``(edge, value)`` in canonical orientation, sorted."""
        for c in sort_vertices(self._entries):
            yield OrientedEdge(c[:-1], c), self._entries[c]

    def support_vertices(self) -> set[Vertex]:
        """Endpoints of explicit edges (tails excluded)."""
        out = set()
        for c in self._entries:
            out.add(c)
            out.add(c[:-1])
        return out

    def depth(self) -> int:
        """Radius about the root of the ball holding every represented edge."""
        r = max((len(c) for c in self._entries), default=0)
        for c, t in self._tails.items():
            r = max(r, len(c) + len(t))
        return r

    def _tail_above(self, key):
        for i in range(1, len(key)):
            a = key[:i]
            if a in self._tails:
                return a
        return None

    def _canonical_value(self, key):
        if key in self._entries:
            return self._entries[key]
        a = self._tail_above(key)
        if a is None:
            return 0
        t = self._tails[a]
        k = len(key) - len(a) - 1
        return t[k] if k < len(t) else 0

    def value(self, source: Vertex, target: Vertex) -> float:
        """ξ(source → target); reversal flips the sign."""
        if len(target) == len(source) + 1 and target[:-1] == source:
            return self._canonical_value(target)
        if len(source) == len(target) + 1 and source[:-1] == target:
            return -self._canonical_value(source)
        raise DomainError(f"{source} and {target} are not adjacent")

    def __call__(self, edge: OrientedEdge) -> float:
        return self.value(*edge)

    # -- alignment and arithmetic -----------------------------------------
    def _expanded(self, root):
        """Copy with the tail at ``root`` pushed one generation down."""
        entries, tails = dict(self._entries), dict(self._tails)
        _expand_into(self.tree, entries, tails, root)
        return EdgeFunction._raw(self.tree, entries, tails)

    @classmethod
    def _raw(cls, tree, entries, tails):
        obj = object.__new__(cls)
        obj.tree = tree
        obj._entries = entries
        obj._tails = tails
        return obj

    def _combine(self, other, alpha, beta):
        _check_same_tree(self, other)
        a, b = _aligned(self, other)
        entries = {c: alpha * x for c, x in a._entries.items()}
        for c, x in b._entries.items():
            entries[c] = entries.get(c, 0) + beta * x
        tails = {c: [alpha * x for x in t] for c, t in a._tails.items()}
        for c, t in b._tails.items():
            cur = tails.setdefault(c, [])
            cur.extend([0] * (len(t) - len(cur)))
            for k, x in enumerate(t):
                cur[k] = cur[k] + beta * x
        return EdgeFunction(self.tree, entries, tails)

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        return EdgeFunction(self.tree, {k: c * x for k, x in self._entries.items()},
                            {k: [c * x for x in t] for k, t in self._tails.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / c)

    def __eq__(self, other):
        if not isinstance(other, EdgeFunction):
            return NotImplemented
        if self.tree != other.tree:
            return False
        d = self - other
        return not d._entries and not d._tails

    __hash__ = None

    def norm_sq(self):
        return inner_edge(self, self)

    def max_abs(self):
        m = max((abs(x) for x in self._entries.values()), default=0)
        for t in self._tails.values():
            m = max(m, max(abs(x) for x in t))
        return m

    def materialize(self) -> "EdgeFunction":
        """Expand every tail into explicit entries."""
        entries, tails = dict(self._entries), dict(self._tails)
        while tails:
            _expand_into(self.tree, entries, tails, next(iter(tails)))
        return EdgeFunction(self.tree, entries)

    def restrict(self, vertices: Iterable[Vertex]) -> "EdgeFunction":
        """Explicit restriction to the edges with both endpoints in ``vertices``."""
        out = {}
        for e in self.tree.edges_within(vertices):
            x = self._canonical_value(e.target)
            if x != 0:
                out[e.target] = x
        return EdgeFunction(self.tree, out)

    def __repr__(self):
        return (f"EdgeFunction(q={self.tree.q}, nnz={len(self._entries)}, "
                f"tails={len(self._tails)})")


def _trim(levels):
    t = list(levels)
    while t and t[-1] == 0:
        t.pop()
    return tuple(t)


def _expand_into(tree, entries, tails, root):
    t = tails.pop(root)
    for child in tree.children(root):
        x = entries.get(child, 0) + t[0]
        if x != 0:
            entries[child] = x
        else:
            entries.pop(child, None)
        rest = _trim(t[1:])
        if rest:
            tails[child] = rest


def _aligned(a: EdgeFunction, b: EdgeFunction):
    """Refine both so that neither has data strictly inside the other's tails."""
    if not a._tails and not b._tails:
        return a, b
    ae, at = dict(a._entries), dict(a._tails)
    be, bt = dict(b._entries), dict(b._tails)

    def above(tails, key):
        for i in range(1, len(key)):
            if key[:i] in tails:
                return key[:i]
        return None

    changed = True
    while changed:
        changed = False
        for (xe, xt), (ye, yt) in (((ae, at), (be, bt)), ((be, bt), (ae, at))):
            for key in list(ye) + list(yt):
                r = above(xt, key)
                while r is not None:
                    _expand_into(a.tree, xe, xt, r)
                    changed = True
                    r = above(xt, key)
    return EdgeFunction._raw(a.tree, ae, at), EdgeFunction._raw(b.tree, be, bt)


# -- inner products ---------------------------------------------------------
def inner_edge(xi: EdgeFunction, eta: EdgeFunction) -> float:
    """⟨ξ, η⟩ = ½ Σ over oriented edges = Σ over geometric edges."""
    _check_same_tree(xi, eta)
    a, b = _aligned(xi, eta)
    small, big = (a, b) if len(a._entries) <= len(b._entries) else (b, a)
    total = 0
    for c, x in small._entries.items():
        y = big._entries.get(c)
        if y is not None:
            total += x * y
    q = xi.tree.q
    for c, t in a._tails.items():
        s = b._tails.get(c)
        if s is not None:
            total += sum(q ** (k + 1) * x * y for k, (x, y) in enumerate(zip(t, s)))
    return total


def inner_vertex(f: VertexFunction, g: VertexFunction) -> float:
    """(f, g) = Σ f(x) g(x) deg(x)."""
    _check_same_tree(f, g)
    small, big = (f, g) if len(f._entries) <= len(g._entries) else (g, f)
    tree = f.tree
    return sum(x * big._entries[v] * tree.degree(v)
               for v, x in small._entries.items() if v in big._entries)


# -- operators ----------------------------------------------------------------
def chi(tree: RegularTree, x: Vertex, y: Vertex) -> EdgeFunction:
    """Signed characteristic function of the geodesic from ``x`` to ``y``."""
    path = tree.geodesic(x, y)
    entries = {}
    for a, b in zip(path, path[1:]):
        if len(b) > len(a):
            entries[b] = 1
        else:
            entries[a] = -1
    return EdgeFunction(tree, entries)


def gradient(f: VertexFunction) -> EdgeFunction:
    """(∇f)(e) = f(e₊) − f(e₋)."""
    tree = f.tree
    keys = set()
    for v in f._entries:
        if v:
            keys.add(v)
        keys.update(tree.children(v))
    entries = {c: f(c) - f(c[:-1]) for c in keys}
    return EdgeFunction(tree, entries)


def divergence(xi: EdgeFunction) -> VertexFunction:
    """(∇*ξ)(x) = (1/deg x) Σ_{y∼x} ξ(y, x); the adjoint of :func:`gradient`."""
    if not xi.is_finite:
        raise DomainError("divergence of a tailed edge function is not finitely supported; "
                          "use divergence_at")
    tree = xi.tree
    acc: dict[Vertex, float] = {}
    for c, x in xi._entries.items():
        p = c[:-1]
        acc[c] = acc.get(c, 0) + x
        acc[p] = acc.get(p, 0) - x
    return VertexFunction(tree, {v: s / tree.degree(v) for v, s in acc.items()})


def divergence_at(xi: EdgeFunction, x: Vertex) -> float:
    """Pointwise divergence; works for tailed functions too."""
    tree = xi.tree
    return sum(xi.value(y, x) for y in tree.neighbors(x)) / tree.degree(x)


def laplacian(f: VertexFunction, x: Vertex) -> float:
    """ℒf(x) = (1/deg x) Σ_{y∼x} f(y) − f(x)."""
    tree = f.tree
    return sum(f(y) for y in tree.neighbors(x)) / tree.degree(x) - f(x)


def integrate(xi: EdgeFunction, x0: Vertex, domain: Iterable[Vertex]) -> VertexFunction:
    """Potential ξ̃ with ξ̃(x0) = 0 and ∇ξ̃ = ξ on edges inside ``domain``.

    Values are sums of ξ along geodesics from ``x0``.  ``domain`` must be
    connected and contain ``x0``.
    """
    tree = xi.tree
    dom = set(domain)
    if x0 not in dom:
        raise DomainError("domain does not contain the basepoint")
    values = {x0: 0}
    frontier = [x0]
    while frontier:
        nxt = []
        for v in frontier:
            for w in tree.neighbors(v):
                if w in dom and w not in values:
                    values[w] = values[v] + xi.value(v, w)
                    nxt.append(w)
        frontier = nxt
    if len(values) != len(dom):
        raise DomainError(f"domain is disconnected: {len(dom) - len(values)} vertices unreachable from basepoint")
    return VertexFunction(tree, values)


# -- random sparse inputs -------------------------------------------------------
def random_vertex_function(tree, rng, radius=4, nnz=6, center=()) -> VertexFunction:
    """Gaussian values on ``nnz`` distinct vertices of ``ball(center, radius)``."""
    pool = tree.ball(center, radius)
    idx = rng.choice(len(pool), size=min(nnz, len(pool)), replace=False)
    return VertexFunction(tree, {pool[i]: float(rng.standard_normal()) for i in sorted(idx)})


def random_edge_function(tree, rng, radius=4, nnz=6, center=()) -> EdgeFunction:
    """Gaussian values on ``nnz`` distinct edges of ``ball(center, radius)``."""
    pool = [e.target for e in tree.edges_within(tree.ball(center, radius))]
    idx = rng.choice(len(pool), size=min(nnz, len(pool)), replace=False)
    return EdgeFunction(tree, {pool[i]: float(rng.standard_normal()) for i in sorted(idx)})


def gradient_norm_bound(f: VertexFunction) -> float:
    """√2 ‖f‖, the operator-norm bound for the gradient."""
    return math.sqrt(2 * f.norm_sq())


def as_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
