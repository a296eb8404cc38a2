"""Combinatorics of the (q+1)-regular tree.

Vertices are addressed by their path from a fixed root: a tuple of child
indices whose first entry lies in ``0..q`` (the root has q+1 children) and
whose later entries lie in ``0..q-1``.  The empty tuple is the root.  This
address is canonical, so tuples can be compared, hashed and sorted directly.

Oriented edges are stored "away from the root": the geometric edge between
``v`` and its parent is identified with the child ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Tuple

from .exceptions import AddressError, DomainError, ParameterError

Vertex = Tuple[int, ...]

ROOT: Vertex = ()


def format_vertex(v: Vertex) -> str:
    """Text form of an address: ``"/"`` for the root, ``"/0/1"`` otherwise."""
    return "/" + "/".join(str(i) for i in v)


def parse_vertex(text: str) -> Vertex:
    """Inverse of :func:`format_vertex`. Range checks need a tree, see
    :meth:`RegularTree.validate`."""
    text = text.strip()
    if not text.startswith("/"):
        raise AddressError(f"vertex address must start with '/': {text!r}")
    if text == "/":
        return ROOT
    parts = text[1:].split("/")
    try:
        path = tuple(int(p) for p in parts)
    except ValueError:
        raise AddressError(f"non-integer component in vertex address {text!r}") from None
    if any(p < 0 for p in path) or any(p != p.strip() for p in parts):
        raise AddressError(f"malformed vertex address {text!r}")
    return path


def common_prefix_length(u: Vertex, v: Vertex) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def distance(u: Vertex, v: Vertex) -> int:
    """Graph distance; the geodesic passes through the deepest common ancestor."""
    k = common_prefix_length(u, v)
    return len(u) + len(v) - 2 * k


def geodesic(u: Vertex, v: Vertex) -> list[Vertex]:
    """Vertices ``u = z_0, ..., z_m = v`` of the unique geodesic."""
    k = common_prefix_length(u, v)
    up = [u[:i] for i in range(len(u), k - 1, -1)]
    down = [v[:i] for i in range(k + 1, len(v) + 1)]
    return up + down


def is_ancestor(a: Vertex, v: Vertex) -> bool:
    """True when ``a`` is a proper ancestor of ``v`` (closer to the root)."""
    return len(a) < len(v) and v[: len(a)] == a


class OrientedEdge(NamedTuple):
    source: Vertex
    target: Vertex

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.target, self.source)

    @property
    def canonical_key(self) -> Vertex:
        """The child endpoint, which names the geometric edge."""
        if len(self.target) == len(self.source) + 1:
            return self.target
        return self.source

    @property
    def points_away_from_root(self) -> bool:
        return len(self.target) > len(self.source)


@dataclass(frozen=True)
class RegularTree:
    """The (q+1)-regular tree with a distinguished root.

    Parameters
    ----------
    q : int
        Branching parameter, ``q >= 2``. Every vertex has ``q + 1`` neighbours.
    """

    q: int

    def __post_init__(self):
        if isinstance(self.q, bool) or not isinstance(self.q, int):
            raise ParameterError(f"q must be an integer, got {self.q!r}")
        if self.q < 2:
            raise ParameterError(f"q must be >= 2, got {self.q}")

    @property
    def root(self) -> Vertex:
        return ROOT

    # -- addresses -------------------------------------------------------
    def validate(self, v) -> Vertex:
        if not isinstance(v, tuple):
            raise AddressError(f"vertex must be a tuple of child indices, got {v!r}")
        for depth, i in enumerate(v):
            if isinstance(i, bool) or not isinstance(i, int):
                raise AddressError(f"non-integer child index in {v!r}")
            bound = self.q + 1 if depth == 0 else self.q
            if not 0 <= i < bound:
                raise AddressError(
                    f"child index {i} at depth {depth} out of range 0..{bound - 1} in {v!r}")
        return v

    def parse(self, text: str) -> Vertex:
        return self.validate(parse_vertex(text))

    def degree(self, v: Vertex) -> int:
        return self.q + 1

    def parent(self, v: Vertex) -> Vertex:
        if not v:
            raise DomainError("the root has no parent")
        return v[:-1]

    def children(self, v: Vertex) -> list[Vertex]:
        n = self.q + 1 if not v else self.q
        return [v + (i,) for i in range(n)]

    def neighbors(self, v: Vertex) -> list[Vertex]:
        """All q+1 neighbours; parent first, then children in index order."""
        if not v:
            return self.children(v)
        return [v[:-1]] + self.children(v)

    def distance(self, u: Vertex, v: Vertex) -> int:
        return distance(self.validate(u), self.validate(v))

    def geodesic(self, u: Vertex, v: Vertex) -> list[Vertex]:
        return geodesic(self.validate(u), self.validate(v))

    def outward_neighbors(self, center: Vertex, w: Vertex) -> list[Vertex]:
        """Neighbours of ``w`` farther from ``center`` than ``w``, in sorted order."""
        nbrs = self.neighbors(w)
        if w == center:
            return sorted(nbrs)
        d = distance(center, w)
        return sorted(x for x in nbrs if distance(center, x) > d)

    # -- balls and spheres ----------------------------------------------
    def ball(self, center: Vertex, radius: int) -> list[Vertex]:
        """Vertices at distance ``<= radius``, sorted by (depth, address)."""
        self.validate(center)
        if radius < 0:
            raise ParameterError(f"radius must be >= 0, got {radius}")
        seen = {center}
        frontier = [center]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for x in self.neighbors(w):
                    if x not in seen:
                        seen.add(x)
                        nxt.append(x)
            frontier = nxt
        return sorted(seen, key=lambda v: (len(v), v))

    def sphere(self, center: Vertex, n: int) -> list[Vertex]:
        return [v for v in self.ball(center, n) if distance(center, v) == n]

    def ball_size(self, radius: int) -> int:
        if radius == 0:
            return 1
        q = self.q
        return 1 + (q + 1) * (q ** radius - 1) // (q - 1)

    def sphere_size(self, n: int) -> int:
        return 1 if n == 0 else (self.q + 1) * self.q ** (n - 1)

    def hull(self, vertices: Iterable[Vertex]) -> set[Vertex]:
        """Smallest subtree containing ``vertices``."""
        vs = [self.validate(v) for v in vertices]
        if not vs:
            return set()
        anchor = vs[0]
        out = {anchor}
        for v in vs[1:]:
            out.update(geodesic(anchor, v))
        return out

    def edges_within(self, vertices: Iterable[Vertex]) -> list[OrientedEdge]:
        """Geometric edges with both endpoints in ``vertices``, canonically oriented."""
        vs = set(vertices)
        return [OrientedEdge(v[:-1], v) for v in sorted(vs, key=lambda v: (len(v), v))
                if v and v[:-1] in vs]

    def oriented_edge(self, source: Vertex, target: Vertex) -> OrientedEdge:
        if distance(self.validate(source), self.validate(target)) != 1:
            raise DomainError(f"{format_vertex(source)} and {format_vertex(target)} are not adjacent")
        return OrientedEdge(source, target)


@dataclass(frozen=True, eq=False)
class BallAutomorphism:
    """Automorphism of ``ball(center, radius)`` fixing ``center``.

    ``slots[w]`` permutes the outward neighbours of ``w`` (sorted order, see
    :meth:`RegularTree.outward_neighbors`): the neighbour in slot ``i`` of ``w``
    is sent to the neighbour in slot ``slots[w][i]`` of the image of ``w``.
    Vertices missing from ``slots`` use the identity permutation.
    """

    tree: RegularTree
    center: Vertex
    radius: int
    slots: Mapping[Vertex, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.tree.validate(self.center)
        if self.radius < 0:
            raise ParameterError("radius must be >= 0")
        for w, perm in self.slots.items():
            n = len(self.tree.outward_neighbors(self.center, w))
            if sorted(perm) != list(range(n)):
                raise ParameterError(f"slot permutation at {format_vertex(w)} is not a permutation of 0..{n - 1}")
            if distance(self.center, w) >= self.radius:
                raise DomainError(f"slot permutation at {format_vertex(w)} lies on or outside the boundary")

    @classmethod
    def identity(cls, tree, center, radius):
        return cls(tree, center, radius, {})

    @classmethod
    def transposition(cls, tree, center, radius, at, i, j):
        """Swap the outward slots ``i`` and ``j`` of vertex ``at``."""
        n = len(tree.outward_neighbors(center, at))
        perm = list(range(n))
        perm[i], perm[j] = perm[j], perm[i]
        return cls(tree, center, radius, {at: tuple(perm)})

    @classmethod
    def transporter(cls, tree, center, radius, u, v):
        """An automorphism sending ``u`` to ``v``; both must lie on the same sphere."""
        n = distance(center, u)
        if distance(center, v) != n:
            raise DomainError("u and v are not on a common sphere about the center")
        if n > radius:
            raise DomainError("u lies outside the ball")
        pu, pv = geodesic(center, u), geodesic(center, v)
        slots = {}
        for k in range(n):
            out_u = tree.outward_neighbors(center, pu[k])
            out_v = tree.outward_neighbors(center, pv[k])
            i, j = out_u.index(pu[k + 1]), out_v.index(pv[k + 1])
            if i != j:
                perm = list(range(len(out_u)))
                perm[i], perm[j] = j, i
                slots[pu[k]] = tuple(perm)
        return cls(tree, center, radius, slots)

    @cached_property
    def mapping(self) -> dict[Vertex, Vertex]:
        tree, c = self.tree, self.center
        image = {c: c}
        frontier = [c]
        for _ in range(self.radius):
            nxt = []
            for w in frontier:
                src = tree.outward_neighbors(c, w)
                dst = tree.outward_neighbors(c, image[w])
                perm = self.slots.get(w, range(len(src)))
                for x, s in zip(src, perm):
                    image[x] = dst[s]
                    nxt.append(x)
            frontier = nxt
        return image

    def __call__(self, v: Vertex) -> Vertex:
        try:
            return self.mapping[v]
        except KeyError:
            raise DomainError(f"{format_vertex(v)} is outside ball({format_vertex(self.center)}, {self.radius})") from None

    def _check_compatible(self, other):
        if (other.tree, other.center, other.radius) != (self.tree, self.center, self.radius):
            raise ParameterError("automorphisms act on different balls")

    def _from_mapping(self, image):
        c, tree = self.center, self.tree
        slots = {}
        for w in image:
            if distance(c, w) >= self.radius:
                continue
            src = tree.outward_neighbors(c, w)
            dst = tree.outward_neighbors(c, image[w])
            perm = tuple(dst.index(image[x]) for x in src)
            if perm != tuple(range(len(src))):
                slots[w] = perm
        return BallAutomorphism(tree, c, self.radius, slots)

    def compose(self, other: "BallAutomorphism") -> "BallAutomorphism":
        """``self ∘ other``: apply ``other`` first."""
        self._check_compatible(other)
        return self._from_mapping({v: self.mapping[w] for v, w in other.mapping.items()})

    def inverse(self) -> "BallAutomorphism":
        return self._from_mapping({w: v for v, w in self.mapping.items()})


def edge_flip(tree: RegularTree, u: Vertex, v: Vertex, radius: int) -> dict[Vertex, Vertex]:
    """Isometry swapping the adjacent vertices ``u`` and ``v``.

    Defined on the vertices within ``radius`` of the edge ``{u, v}``; the
    branches hanging off ``u`` are matched with those off ``v`` in sorted order.
    """
    if distance(u, v) != 1:
        raise DomainError("edge_flip needs adjacent vertices")

    def away(w, prev):
        return sorted(x for x in tree.neighbors(w) if x != prev)

    image = {u: v, v: u}
    frontier = [(u, v, v, u), (v, u, u, v)]  # (vertex, its image, vertex's predecessor, image's predecessor)
    for _ in range(radius):
        nxt = []
        for w, w_img, prev, prev_img in frontier:
            for x, y in zip(away(w, prev), away(w_img, prev_img)):
                image[x] = y
                nxt.append((x, y, w, w_img))
        frontier = nxt
    return image


def sort_vertices(vertices: Iterable[Vertex]) -> list[Vertex]:
    return sorted(vertices, key=lambda v: (len(v), v))


def path_vertex(tree: RegularTree, n: int, branch: Sequence[int] = ()) -> Vertex:
    """A representative vertex of the sphere of radius ``n`` about the root."""
    v = tuple(branch[:n]) + (0,) * max(0, n - len(branch))
    return tree.validate(v)
