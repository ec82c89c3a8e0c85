import numpy as np
import pytest

from maslovcount.errors import ContractViolation
from maslovcount.numerics import subspace_angle
from maslovcount.propagate import (
    fundamental_matrix,
    green_identity_defect,
    symplectic_drift,
    transport_frame,
)
from maslovcount.system import builtin_system


def test_free_fundamental_matrix_matches_closed_form():
    s = builtin_system("constant_demo")
    k = 1.5
    xs = np.array([0.5, 1.0, 3.0])
    traj = fundamental_matrix(s, k * k, xs)
    for x, phi in zip(xs, traj.values):
        exact = np.array([[np.cos(k * x), np.sin(k * x) / k], [-k * np.sin(k * x), np.cos(k * x)]])
        assert np.allclose(phi, exact, atol=1e-8)


@pytest.mark.parametrize("lam", [0.2, 0.3 + 0.5j])
def test_symplectic_drift_small(lam):
    s = builtin_system("schrodinger_gap")
    xs = np.linspace(0.0, 20.0, 11)
    traj = fundamental_matrix(s, lam, xs)
    bar = traj if np.isreal(lam) else fundamental_matrix(s, np.conj(lam), xs)
    assert symplectic_drift(traj, bar, relative=True) <= 1e-8


def test_drift_requires_conjugate_partner():
    s = builtin_system("schrodinger_gap")
    xs = np.linspace(0.0, 1.0, 3)
    traj = fundamental_matrix(s, 0.5j, xs)
    with pytest.raises(ContractViolation):
        symplectic_drift(traj, traj)


@pytest.mark.parametrize("name", ["schrodinger_gap", "hydrogen_radial"])
def test_green_identity_on_unit_interval(name):
    s = builtin_system(name)
    rng = np.random.default_rng(4)
    for lam in (0.7j, -0.4 + 1.2j):
        y0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        z0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert green_identity_defect(s, lam, y0, z0, 1.0, 2.0) <= 1e-7


def test_transport_frame_spans_propagated_plane():
    s = builtin_system("schrodinger_gap")
    frame = np.array([[np.sin(np.pi / 8)], [-np.cos(np.pi / 8)]], dtype=complex)
    lam = -0.2
    traj = transport_frame(s, lam, frame, 0.0, 30.0)
    phi = fundamental_matrix(s, lam, [10.0]).values[0]
    assert subspace_angle(traj(10.0), phi @ frame) < 1e-7
    q = traj(25.0)
    assert np.allclose(q.conj().T @ q, np.eye(1), atol=1e-12)


def test_transport_frame_backward():
    s = builtin_system("constant_demo")
    frame = np.array([[1.0], [0.0]], dtype=complex)
    traj = transport_frame(s, 4.0, frame, 3.0, 0.0)
    k = 2.0
    # u(3) = 1, u'(3) = 0 gives u(x) = cos(k (x - 3)).
    expected = np.array([[np.cos(-3 * k)], [-k * np.sin(-3 * k)]])
    assert subspace_angle(traj(0.0), expected) < 1e-7
