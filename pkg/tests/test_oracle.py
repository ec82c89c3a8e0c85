import math

import numpy as np
import pytest
from hypothesis import assume, given, settings

from maslovcount.count import EigencountRequest, count_regular_singular, niessen_basis_at
from maslovcount.endpoint import build_niessen_basis
from maslovcount.errors import ContractViolation
from maslovcount.oracle import (
    disc_count,
    free_particle,
    graded_mesh,
    harmonic_oscillator,
    hydrogen_transformed,
    pruefer_count,
    truncate,
)
from maslovcount.system import builtin_system

from .randomized import truncated_problems, well_separated


def test_free_particle_both_oracles():
    prob = free_particle()
    assert pruefer_count(prob, 0.5, 5.0) == 2
    assert disc_count(prob, 0.5, 5.0, 1e-3) == 2


def test_oscillator_both_oracles():
    prob = harmonic_oscillator()
    assert pruefer_count(prob, 0.0, 6.0) == 3
    assert disc_count(prob, 0.0, 6.0, 1e-2) == 3


def test_truncated_gap_problem():
    s = builtin_system("schrodinger_gap")
    prob = truncate(s, 0.0, 50.0, [math.cos(math.pi / 8), math.sin(math.pi / 8)], [1.0, 0.0])
    assert pruefer_count(prob, -0.31, 0.2) == disc_count(prob, -0.31, 0.2, 1e-2) == 5


@pytest.mark.parametrize(
    "beta, expected",
    [(None, 2), (0.2971368586412774 + 1.4658285273447391j, 3), (0.2952 - 1.4663j, 2)],
)
def test_hydrogen_boundary_frames(beta, expected):
    h = builtin_system("hydrogen_radial")
    cls = niessen_basis_at(h, "a", 1j).classification
    basis = build_niessen_basis(cls, None if beta is None else [beta])
    prob = hydrogen_transformed(h, basis.R, 1j)
    mesh = graded_mesh(1e-4, 60.0, 1e-2, 1e-6)
    assert pruefer_count(prob, -5.0, -0.375) == expected
    assert disc_count(prob, -5.0, -0.375, mesh) == expected


def test_graded_mesh_shape():
    mesh = graded_mesh(0.0, 1.0, 0.1, 1e-3)
    assert mesh[0] == 0.0 and mesh[-1] == 1.0
    steps = np.diff(mesh)
    assert steps[0] == pytest.approx(1e-3)
    assert steps.max() <= 0.1 + 1e-12
    with pytest.raises(ContractViolation):
        graded_mesh(0.0, 1.0, 0.1, 0.2)


def test_truncate_contracts():
    s = builtin_system("schrodinger_gap")
    with pytest.raises(ContractViolation):
        truncate(s, -1.0, 2.0, [1.0, 0.0], [1.0, 0.0])
    with pytest.raises(ContractViolation):
        truncate(s, 0.0, 2.0, [1.0, 1j], [1.0, 0.0])
    with pytest.raises(ContractViolation):
        hydrogen_transformed(s, np.ones(2), 1j)


@given(truncated_problems())
@settings(max_examples=25, deadline=None, derandomize=True)
def test_maslov_count_agrees_with_oracles(case):
    prob, lambda1, lambda2 = case
    assume(well_separated(prob, lambda1, lambda2))
    req = EigencountRequest(prob.regular_system(), lambda1, lambda2, alpha=prob.left, alpha_b=prob.right)
    expected = pruefer_count(prob, lambda1, lambda2)
    assert disc_count(prob, lambda1, lambda2, 2e-3) == expected
    assert count_regular_singular(req).count == expected
