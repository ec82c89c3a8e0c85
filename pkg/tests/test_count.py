import numpy as np
import pytest

from maslovcount.count import EigencountRequest, count, niessen_basis_at
from maslovcount.errors import ContractViolation
from maslovcount.oracle import free_particle, harmonic_oscillator
from maslovcount.system import alpha_matrix, builtin_system


def _regular_request(prob, lambda1, lambda2):
    return EigencountRequest(prob.regular_system(), lambda1, lambda2, alpha=prob.left, alpha_b=prob.right)


def test_free_particle_counts_squares():
    prob = free_particle()
    report = count(_regular_request(prob, 0.5, 10.0))
    assert report.count == 3
    assert report.nullity.total == 3
    assert not report.caveat


def test_oscillator_counts_odd_integers():
    prob = harmonic_oscillator()
    assert count(_regular_request(prob, 0.0, 6.0)).count == 3


def test_eigenvalue_at_lambda1_is_reported():
    prob = free_particle()
    report = count(_regular_request(prob, 1.0, 5.0))
    assert report.caveat
    assert report.count == 2


def test_gap_single_eigenvalue_window():
    s = builtin_system("schrodinger_gap")
    req = EigencountRequest(s, 0.1332 - 5e-3, 0.1332 + 5e-3, alpha=alpha_matrix(s.defaults.alpha))
    report = count(req)
    assert report.count == 1
    assert report.nullity.total == 1
    assert report.shelf.unitarity <= 1e-8


def test_constant_potential_below_essential_spectrum():
    s = builtin_system("constant_demo")
    report = count(EigencountRequest(s, -2.0, -0.5, alpha=alpha_matrix([1.0, 0.0])))
    assert report.count == 0


def test_hydrogen_default_boundary_frame():
    s = builtin_system("hydrogen_radial")
    basis = niessen_basis_at(s, "a", 1j)
    report = count(EigencountRequest(s, -5.0, -0.375, basis_a=basis))
    assert report.count == 2
    assert np.allclose([p.t for p in report.points], [1.95, 5.0], atol=0.1)


def test_request_contracts():
    s = builtin_system("schrodinger_gap")
    alpha = alpha_matrix(s.defaults.alpha)
    with pytest.raises(ContractViolation):
        count(EigencountRequest(s, 0.2, -0.31, alpha=alpha))
    with pytest.raises(ContractViolation):
        count(EigencountRequest(s, -0.31, 0.2))


def test_gap_warning_outside_known_gap():
    s = builtin_system("schrodinger_gap")
    report = count(EigencountRequest(s, 0.55, 0.7, alpha=alpha_matrix(s.defaults.alpha)))
    assert report.gap_warning
