import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from maslovcount.errors import ContractViolation
from maslovcount.maslov import (
    intersection_dim,
    maslov_box,
    nullity_sum,
    spectral_flow,
    wtilde,
)
from maslovcount.numerics import symplectic_j

DIRICHLET = np.array([[1.0], [0.0]])


def _graph(s: np.ndarray) -> np.ndarray:
    """Lagrangian frame ``[I; S]`` for Hermitian ``S``."""
    return np.vstack([np.eye(s.shape[0]), s])


def _hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def _rotating(t: float) -> tuple[np.ndarray, np.ndarray]:
    return DIRICHLET, np.array([[np.cos(t)], [np.sin(t)]])


def _narrow_turn(width: float):
    """Half turn of the second plane concentrated in a window of ``width``."""

    def path(t: float):
        th = 0.3 + np.pi * expit((t - 0.37) / width)
        return DIRICHLET, np.array([[np.cos(th)], [np.sin(th)]])

    return path


@given(st.integers(0, 10_000), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_wtilde_unitary_and_frame_invariant(seed, n):
    rng = np.random.default_rng(seed)
    f1 = _graph(_hermitian(rng, n))
    f2 = _graph(_hermitian(rng, n))
    w = wtilde(f1, f2)
    assert np.abs(w.conj().T @ w - np.eye(n)).max() <= 1e-8
    m1 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3 * np.eye(n)
    m2 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3 * np.eye(n)
    assert np.allclose(wtilde(f1 @ m1, f2 @ m2), w, atol=1e-8)


@given(st.integers(0, 10_000), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_kernel_of_w_plus_identity_matches_intersection(seed, n):
    rng = np.random.default_rng(seed)
    s = _hermitian(rng, n)
    v = rng.normal(size=(n, 1)) + 1j * rng.normal(size=(n, 1))
    v /= np.linalg.norm(v)
    # Perturb S only off the direction v so the two graphs share v.
    p = np.eye(n) - v @ v.conj().T
    s2 = s + p @ _hermitian(rng, n) @ p
    f1, f2 = _graph(s), _graph(s2)
    w = wtilde(f1, f2)
    k = n - np.linalg.matrix_rank(w + np.eye(n), tol=1e-8)
    assert k == intersection_dim(f1, f2) >= 1


def test_wtilde_rejects_non_lagrangian():
    bad = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ContractViolation):
        wtilde(bad, _graph(np.zeros((2, 2))))


def test_intersection_dim_of_equal_planes():
    f = _graph(np.diag([1.0, 2.0]))
    assert intersection_dim(f, f) == 2
    assert intersection_dim(f, symplectic_j(2) @ f) == 0


def test_rotation_crossings_and_directions():
    res = spectral_flow(_rotating, 0.1, 7.0)
    assert res.index == -2
    assert [p.direction for p in res.points] == [-1, -1]
    assert np.allclose([p.t for p in res.points], [np.pi, 2 * np.pi], atol=1e-3)
    assert res.unitarity <= 1e-8


def test_additivity_and_reversal():
    whole = spectral_flow(_rotating, 0.1, 7.0).index
    parts = spectral_flow(_rotating, 0.1, 2.0).index + spectral_flow(_rotating, 2.0, 7.0).index
    assert whole == parts
    assert spectral_flow(_rotating, 7.0, 0.1).index == -whole


def test_no_crossing_gives_zero():
    assert spectral_flow(_rotating, 0.2, 3.0).index == 0


@pytest.mark.parametrize("width", [1e-2, 1e-6, 1e-13])
def test_narrow_turn_detected(width):
    res = spectral_flow(_narrow_turn(width), 0.0, 1.0, np.linspace(0.0, 1.0, 9))
    assert res.index == -1
    crossing = 0.37 + width * np.log((np.pi - 0.3) / 0.3)
    assert abs(res.points[0].t - crossing) <= 1e-3


def test_narrow_turn_missed_without_sign_check():
    res = spectral_flow(_narrow_turn(1e-6), 0.0, 1.0, np.linspace(0.0, 1.0, 9), sign_check=False)
    assert res.index == 0


def test_nullity_sum_counts_intersections():
    res = nullity_sum(_rotating, np.linspace(0.1, 7.0, 200))
    assert res.total == 2
    assert np.allclose([t for t, _ in res.locations], [np.pi, 2 * np.pi], atol=1e-3)


def test_box_total_cancels():
    shelves = {
        "bottom": spectral_flow(_rotating, 0.1, 4.0),
        "right": spectral_flow(_rotating, 4.0, 4.5),
        "top": spectral_flow(_rotating, 0.1, 4.5),
    }
    report = maslov_box(shelves, {"bottom": 1, "right": 1, "top": -1})
    assert report.total == 0
