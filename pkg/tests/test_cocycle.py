import math

import numpy as np
import pytest

from treecocycle.cocycle import (GrowthBound, RadialProfile, basepoint_harmonicity,
                                 coboundary_difference, distance_potential, growth_bound_check,
                                 haagerup, haagerup_profile, laplace_norm_identity, measured_profile,
                                 optimal_profile, perturbed_profile, projected_cocycle,
                                 projected_norm_sq, recurrence_residual, virtual_potentials)
from treecocycle.edgespace import EdgeFunction, chi, divergence_at
from treecocycle.exceptions import DomainError, ParameterError, ReliabilityError
from treecocycle.green import grad_green_delta, project
from treecocycle.tree import ROOT, BallAutomorphism, RegularTree, path_vertex

TOL = 1e-10


def test_haagerup_basics(t2):
    assert haagerup(t2, ROOT) == EdgeFunction.zero(t2)
    for y in t2.ball(ROOT, 5)[::7]:
        assert haagerup(t2, y).norm_sq() == t2.distance(ROOT, y)


def test_haagerup_cocycle_difference(t2):
    ball = t2.ball(ROOT, 3)
    for y in ball[::2]:
        for z in ball[1::3]:
            assert haagerup(t2, z) - haagerup(t2, y) == chi(t2, y, z)


def test_haagerup_other_basepoint(t3):
    x0 = (1, 2)
    assert haagerup(t3, (0,), basepoint=x0) == chi(t3, x0, (0,))


def test_projected_cocycle_at_basepoint(t2):
    assert projected_cocycle(t2, ROOT, TOL).harmonic_part == EdgeFunction.zero(t2)


@pytest.mark.parametrize("n,value", [(1, 1 / 3), (3, 11 / 6)])
def test_projected_norm_examples(t2, n, value):
    measured = projected_cocycle(t2, path_vertex(t2, n), TOL).harmonic_part.norm_sq()
    assert abs(measured - value) < TOL
    assert math.isclose(projected_norm_sq(t2, n), value, rel_tol=1e-14)


def test_projected_cocycle_explicit_sum(t2):
    """‖χ − Qχ‖² from an explicit edge-by-edge sum on a large ball."""
    y = (2, 0, 1)
    R = 13
    q_chi = (grad_green_delta(t2, y, R) - grad_green_delta(t2, ROOT, R)) / 3
    explicit = (chi(t2, ROOT, y) - q_chi).norm_sq()
    assert abs(explicit - 11 / 6) < 1e-3


@pytest.mark.parametrize("n", range(1, 5))
def test_radiality_over_orbits(t2, n):
    y = path_vertex(t2, n)
    base = projected_cocycle(t2, y, TOL).harmonic_part.norm_sq()
    for z in t2.sphere(ROOT, n):
        image = BallAutomorphism.transporter(t2, ROOT, n, y, z)(y)
        assert image == z
        assert abs(projected_cocycle(t2, z, TOL).harmonic_part.norm_sq() - base) < 1e-8


def test_consistency_triangle(t3):
    for y in [(0,), (1, 2), (3, 0, 1, 2)]:
        res = projected_cocycle(t3, y, TOL)
        total = res.gradient_part.norm_sq() + res.harmonic_part.norm_sq()
        assert abs(total - t3.distance(ROOT, y)) < 1e-8


def test_basepoint_harmonicity(tree):
    assert basepoint_harmonicity(tree, TOL) ** 2 < TOL


# -- profiles ---------------------------------------------------------------------
def test_profile_validation():
    with pytest.raises(ParameterError):
        RadialProfile(2, [1.0, 2.0])
    with pytest.raises(ParameterError):
        RadialProfile(2, [0.0, -1.0])


def test_growth_bound_constants():
    b = GrowthBound(2, 1 / 3)
    assert math.isclose(b.A, 1) and math.isclose(b.B, 4 / 3)
    b = GrowthBound(3, 0.5)
    assert math.isclose(b.A, 1) and math.isclose(b.B, 0.75)


def test_optimal_profile_examples(t2, t3):
    p = optimal_profile(t2, 5, 1 / 3)
    assert p[0] == 0 and math.isclose(p[1], 1 / 3) and math.isclose(p[3], 11 / 6)
    assert math.isclose(optimal_profile(t3, 3, 0.5)[2], 2 - 0.75 + 0.75 / 9)
    with pytest.raises(ParameterError):
        optimal_profile(t2, 5, 0)


def test_optimal_profile_monotone_and_linear(t2):
    p = optimal_profile(t2, 60, 1 / 3)
    assert all(a < b for a, b in zip(p.values, p.values[1:]))
    assert abs((p[60] - p[59]) - GrowthBound(2, 1 / 3).A) < 1e-12


@pytest.mark.parametrize("q", [2, 3, 5])
def test_optimal_profile_has_zero_residual(q):
    p = optimal_profile(RegularTree(q), 12, 0.7)
    assert max(abs(recurrence_residual(p, n)) for n in range(1, 12)) < 1e-12
    assert all(abs(row.slack) < 1e-12 for row in growth_bound_check(p))


def test_haagerup_profile_residual(t2):
    p = haagerup_profile(t2, 8)
    assert p.values == tuple(float(n) for n in range(9))
    for n in range(1, 8):
        assert abs(recurrence_residual(p, n) + 2 / 3) < 1e-12


def test_haagerup_profile_slack(t2):
    q = 2
    for row in growth_bound_check(haagerup_profile(t2, 10)):
        n = row.n
        expected = 2 * q / (q - 1) ** 2 * (q ** -n - 1) + 2 * n / (q - 1)
        assert math.isclose(row.slack, expected, abs_tol=1e-12)
        assert row.slack >= 0 and not row.violated


def test_measured_profile_is_harmonic(t3):
    p = measured_profile(t3, 8, TOL)
    for n in range(1, 8):
        assert abs(recurrence_residual(p, n)) <= 10 * TOL


def test_violation_flagged(t2):
    values = list(optimal_profile(t2, 4, 1 / 3).values)
    values[2] += 0.1
    rows = growth_bound_check(RadialProfile(2, values))
    assert rows[2].violated and not rows[3].violated


def test_residual_index_range(t2):
    p = optimal_profile(t2, 4, 1.0)
    with pytest.raises(IndexError):
        recurrence_residual(p, 0)
    with pytest.raises(IndexError):
        recurrence_residual(p, 4)


@pytest.mark.parametrize("seed", range(5))
def test_perturbed_profile_reproduces_terms(t2, seed):
    rng = np.random.default_rng(seed)
    r = list(-0.05 * rng.uniform(size=9))
    p = perturbed_profile(t2, 10, 1.0, r)
    for n in range(1, 10):
        assert math.isclose(recurrence_residual(p, n), r[n - 1], abs_tol=1e-12)
    assert all(row.slack >= -1e-10 for row in growth_bound_check(p))


# -- potentials ----------------------------------------------------------------------
def test_distance_potential_values(t2):
    f = distance_potential(t2, ROOT, ROOT, 4)
    assert {abs(v) for _, v in f.edges()} == {0.5}
    assert f.value(ROOT, (0,)) == -0.5 and f.value((0, 1), (0,)) == 0.5


@pytest.mark.parametrize("q", [2, 3])
def test_virtual_potentials(q):
    tree = RegularTree(q)
    pot = virtual_potentials(tree, 6)
    inner = tree.ball(ROOT, 5)
    target = (q - 1) / (2 * (q + 1))
    for v in inner:
        assert abs(abs(divergence_at(pot.f_tilde, v)) - target) < 1e-12
    assert abs(divergence_at(pot.f, ROOT)) == 0.5
    # entrywise oracle: f~ = f − ∇Gδ/(q+1), recomputed from the closed form
    for e, v in pot.f_tilde.edges():
        k = tree.distance(ROOT, e.source)
        expected = -0.5 + q ** -k / (q + 1)
        assert math.isclose(v, expected, rel_tol=1e-14)


def test_virtual_potentials_tail(t2):
    pot = virtual_potentials(t2, 5)
    deeper = virtual_potentials(t2, 13).f_prime
    assert 0 <= deeper.norm_sq() - pot.f_prime.norm_sq() <= pot.tail_bound * (1 + 1e-12)
    with pytest.raises(ParameterError):
        virtual_potentials(t2, 0)


def test_coboundary_f_is_chi(t2):
    for y in t2.ball(ROOT, 4):
        assert coboundary_difference(t2, "f", y, TOL) == chi(t2, ROOT, y)
    diff = coboundary_difference(t2, "f", (1,), TOL, support_radius=6)
    assert set(diff.entries.values()) <= {-1, 0, 1} and diff == chi(t2, ROOT, (1,))


def test_coboundary_f_prime_is_gradient_part(t3):
    y = (2, 1)
    diff = coboundary_difference(t3, "f_prime", y, TOL / 4)
    g = project(chi(t3, ROOT, y), TOL).gradient_part
    assert (diff - g).norm_sq() <= TOL


def test_coboundary_f_tilde(t2):
    assert coboundary_difference(t2, "f_tilde", ROOT, TOL) == EdgeFunction.zero(t2)
    d = coboundary_difference(t2, "f_tilde", (0,), TOL)
    assert abs(d.norm_sq() - 1 / 3) < TOL


def test_coboundary_errors(t2):
    with pytest.raises(ParameterError):
        coboundary_difference(t2, "g", (0,), TOL)
    with pytest.raises(ReliabilityError) as err:
        coboundary_difference(t2, "f", (0, 0, 0), TOL, support_radius=2)
    assert err.value.required_radius == 3


# -- Laplacian of the norm ------------------------------------------------------------------
def test_laplace_norm_identity_constant(t2):
    F = {v: chi(t2, ROOT, (1,)) for v in t2.ball(ROOT, 1)}
    assert laplace_norm_identity(t2, F, ROOT) == (0, 0)


def test_laplace_norm_identity_haagerup(t2):
    F = {v: haagerup(t2, v) for v in t2.ball(ROOT, 4)}
    for x in t2.ball(ROOT, 3)[:6]:
        lhs, rhs = laplace_norm_identity(t2, F, x)
        assert abs(lhs - rhs) < 1e-12


def test_laplace_norm_identity_harmonic(t2):
    F = {v: projected_cocycle(t2, v, TOL).harmonic_part for v in t2.ball(ROOT, 1)}
    lhs, rhs = laplace_norm_identity(t2, F, ROOT)
    assert abs(lhs - rhs) < 1e-12
    assert abs(lhs - 1 / 3) < 1e-8


def test_laplace_norm_identity_missing(t2):
    with pytest.raises(DomainError):
        laplace_norm_identity(t2, {ROOT: EdgeFunction.zero(t2)}, ROOT)
