import itertools
from collections import deque

import pytest
from hypothesis import given, strategies as st

from treecocycle.exceptions import AddressError, DomainError, ParameterError
from treecocycle.tree import (ROOT, BallAutomorphism, OrientedEdge, RegularTree, edge_flip,
                              format_vertex, parse_vertex)


def bfs_distances(tree, source, radius):
    """Independent oracle: breadth-first search from ``source`` on the neighbour relation."""
    dist = {source: 0}
    parent = {source: None}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for w in tree.neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue.append(w)
    return dist, parent


def vertices(q, max_depth=5):
    first = st.integers(0, q)
    rest = st.lists(st.integers(0, q - 1), max_size=max_depth - 1)
    return st.one_of(st.just(()), st.tuples(first, rest).map(lambda t: (t[0], *t[1])))


def test_q_must_be_at_least_two():
    with pytest.raises(ParameterError):
        RegularTree(1)


@pytest.mark.parametrize("text,expected", [("/", ()), ("/0", (0,)), ("/2/1/0", (2, 1, 0))])
def test_text_form_round_trip(text, expected):
    assert parse_vertex(text) == expected
    assert format_vertex(expected) == text


@pytest.mark.parametrize("bad", ["", "0/1", "/a", "/0//1", "/-1"])
def test_malformed_text(bad):
    with pytest.raises(AddressError):
        parse_vertex(bad)


@pytest.mark.parametrize("path", [(3,), (0, 2), (-1,)])
def test_out_of_range_path(t2, path):
    with pytest.raises(AddressError):
        t2.validate(path)


def test_distance_examples(t2):
    assert t2.distance(ROOT, ROOT) == 0
    assert t2.distance(ROOT, (0,)) == 1
    assert t2.distance((0, 1), (1,)) == 3


def test_geodesic_examples(t2):
    assert t2.geodesic((0, 1), (0, 1)) == [(0, 1)]
    assert t2.geodesic(ROOT, (2,)) == [ROOT, (2,)]
    assert t2.geodesic((0, 1), (1,)) == [(0, 1), (0,), ROOT, (1,)]


@pytest.mark.parametrize("q", [2, 3])
def test_distance_matches_bfs(q):
    tree = RegularTree(q)
    ball = tree.ball(ROOT, 3)
    for u in ball[:: max(1, len(ball) // 12)]:
        dist, parent = bfs_distances(tree, u, 6)
        for v in ball:
            assert tree.distance(u, v) == dist[v]
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            assert tree.geodesic(u, v) == path[::-1]


def test_every_vertex_has_q_plus_one_neighbours(tree):
    for v in tree.ball(ROOT, 3):
        nb = tree.neighbors(v)
        assert len(nb) == len(set(nb)) == tree.q + 1
        assert all(tree.distance(v, w) == 1 for w in nb)


@pytest.mark.parametrize("q,R,size", [(2, 0, 1), (2, 2, 10), (3, 1, 5), (4, 3, 1 + 5 * 21)])
def test_ball_size(q, R, size):
    tree = RegularTree(q)
    assert len(tree.ball(ROOT, R)) == size == tree.ball_size(R)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_sphere_sizes(q):
    tree = RegularTree(q)
    center = (1,) + (0,) * 2
    for n in range(1, 7 if q < 4 else 6):
        sphere = tree.sphere(center, n)
        assert len(sphere) == (q + 1) * q ** (n - 1) == tree.sphere_size(n)
        assert all(tree.distance(center, v) == n for v in sphere)


def test_ball_is_sorted_and_deterministic(t3):
    ball = t3.ball((0, 1), 2)
    assert len(set(ball)) == len(ball)
    assert ball == t3.ball((0, 1), 2)


@given(st.data())
def test_metric_axioms(data):
    q = data.draw(st.integers(2, 4))
    tree = RegularTree(q)
    u, v, w = (data.draw(vertices(q)) for _ in range(3))
    assert tree.distance(u, v) == tree.distance(v, u)
    assert tree.distance(u, w) <= tree.distance(u, v) + tree.distance(v, w)
    assert (tree.distance(u, v) == 0) == (u == v)
    geo = tree.geodesic(u, v)
    assert geo[::-1] == tree.geodesic(v, u)
    assert len(geo) == tree.distance(u, v) + 1
    assert all(tree.distance(a, b) == 1 for a, b in zip(geo, geo[1:]))


def test_oriented_edge():
    e = OrientedEdge((0, 1), (0,))
    assert e.reversed() == OrientedEdge((0,), (0, 1))
    assert e.reversed() != e
    assert e.canonical_key == (0, 1)
    assert not e.points_away_from_root and e.reversed().points_away_from_root


def test_oriented_edge_requires_adjacency(t2):
    with pytest.raises(DomainError):
        t2.oriented_edge(ROOT, (0, 1))


def test_identity_automorphism(t2):
    a = BallAutomorphism.identity(t2, ROOT, 3)
    assert all(a(v) == v for v in t2.ball(ROOT, 3))


def test_root_child_swap(t2):
    a = BallAutomorphism.transposition(t2, ROOT, 3, ROOT, 0, 1)
    assert a((0,)) == (1,)
    assert a((1, 0)) == (0, 0)
    assert a((2,)) == (2,)


def test_outside_domain(t2):
    a = BallAutomorphism.identity(t2, ROOT, 2)
    with pytest.raises(DomainError):
        a((0, 0, 0))


@pytest.mark.parametrize("center", [ROOT, (1,), (0, 1)])
def test_composed_swaps_preserve_spheres_and_adjacency(t2, center):
    R = 3
    gens = []
    for w in t2.ball(center, R - 1):
        k = len(t2.outward_neighbors(center, w))
        gens += [BallAutomorphism.transposition(t2, center, R, w, i, j)
                 for i, j in itertools.combinations(range(k), 2)]
    ball = t2.ball(center, R)
    for g, h in itertools.islice(itertools.product(gens, repeat=2), 0, None, 7):
        a = g.compose(h)
        image = [a(v) for v in ball]
        assert sorted(image) == sorted(ball)
        for v in ball:
            assert t2.distance(center, a(v)) == t2.distance(center, v)
        for u, v in itertools.combinations(ball, 2):
            assert t2.distance(a(u), a(v)) == t2.distance(u, v)


def test_inverse(t3):
    a = BallAutomorphism.transposition(t3, (0,), 3, (0,), 0, 2).compose(
        BallAutomorphism.transposition(t3, (0,), 3, (1,), 1, 2))
    b = a.inverse()
    assert all(b(a(v)) == v and a(b(v)) == v for v in t3.ball((0,), 3))


@pytest.mark.parametrize("center", [ROOT, (2, 1)])
def test_sphere_transitivity(t2, center):
    R = 3
    for n in range(R + 1):
        sphere = t2.sphere(center, n)
        for u in sphere:
            for v in sphere:
                assert BallAutomorphism.transporter(t2, center, R, u, v)(u) == v


def test_transporter_rejects_different_spheres(t2):
    with pytest.raises(DomainError):
        BallAutomorphism.transporter(t2, ROOT, 3, (0,), (0, 0))


def test_edge_flip_is_isometry(t2):
    m = edge_flip(t2, (0,), (0, 1), 2)
    assert m[(0,)] == (0, 1) and m[(0, 1)] == (0,)
    pts = list(m)
    assert sorted(m.values()) == sorted(pts)
    for u, v in itertools.combinations(pts, 2):
        assert t2.distance(m[u], m[v]) == t2.distance(u, v)
