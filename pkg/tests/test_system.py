import math

import numpy as np
import pytest

from maslovcount.errors import ContractViolation
from maslovcount.numerics import symplectic_j
from maslovcount.system import (
    AtkinsonProbe,
    BoundaryMatrixAlpha,
    HamiltonianSystem,
    alpha_matrix,
    builtin_system,
    scalar_system,
    validate_assumptions,
)


@pytest.mark.parametrize("name", ["schrodinger_gap", "hydrogen_radial", "constant_demo"])
def test_builtins_have_hermitian_coefficients(name):
    s = builtin_system(name)
    assert s.n == 1
    for x in (0.5, 1.0, 7.0):
        for m in (s.B0(x), s.B1(x)):
            m = np.asarray(m, dtype=complex)
            assert np.allclose(m, m.conj().T)


def test_scalar_form_coefficients():
    s = builtin_system("schrodinger_gap")
    x = 2.0
    q = math.sin(x) + 60.0 / (1.0 + x * x)
    assert np.allclose(s.coefficient(x, 0.3), s.B0(x) + 0.3 * s.B1(x))
    assert math.isclose(s.sturm.q(x), q)
    assert s.kind_a == "regular" and s.kind_b == "singular"


def test_hydrogen_parameters():
    s = builtin_system("hydrogen_radial", {"gamma": 2.0, "ell": 1})
    assert s.params == {"gamma": 2.0, "ell": 1}
    with pytest.raises(ContractViolation):
        builtin_system("hydrogen_radial", {"ell": 0.5})
    with pytest.raises(ContractViolation):
        builtin_system("hydrogen_radial", {"mass": 1.0})


def test_unknown_system_rejected():
    with pytest.raises(ContractViolation):
        builtin_system("no_such_system")


def test_custom_expression_system():
    s = builtin_system("custom_expression", {"q": "x^2", "a": "-inf", "b": "inf"})
    assert s.kind_a == "singular" and s.kind_b == "singular"
    assert s.anchor == 0.0
    assert math.isclose(s.sturm.q(3.0), 9.0)
    with pytest.raises(ContractViolation):
        builtin_system("custom_expression", {"p": "1"})


def test_system_contracts():
    eye = lambda x: np.eye(2)
    with pytest.raises(ContractViolation):
        HamiltonianSystem(1, eye, eye, 1.0, 0.0, "regular", "regular", 0.5)
    with pytest.raises(ContractViolation):
        HamiltonianSystem(1, eye, eye, 0.0, math.inf, "regular", "regular", 0.0)
    with pytest.raises(ContractViolation):
        HamiltonianSystem(1, eye, eye, 0.0, 1.0, "regular", "regular", 2.0)


def test_alpha_matrix_lagrangian():
    a = alpha_matrix([math.cos(0.3), math.sin(0.3)])
    assert a.n == 1
    f = a.frame()
    assert np.allclose(f.conj().T @ symplectic_j(1) @ f, 0.0)
    two = alpha_matrix([1, 0, 0, 0, 0, 1, 0, 0])
    assert two.n == 2
    with pytest.raises(ContractViolation):
        alpha_matrix([1, 0, 0])


def test_alpha_rejects_non_lagrangian():
    # Rows e1 and e3 pair position with momentum of the same component.
    with pytest.raises(ContractViolation):
        BoundaryMatrixAlpha(np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=complex))


def test_from_angle_matches_row():
    a = BoundaryMatrixAlpha.from_angle(math.pi / 8)
    assert np.allclose(a.alpha, [[math.cos(math.pi / 8), math.sin(math.pi / 8)]])


def test_validate_gap_passes():
    report = validate_assumptions(builtin_system("schrodinger_gap"), AtkinsonProbe(0.0, 5.0))
    assert report.passed
    assert report.hermiticity_defect == 0.0
    assert min(report.quadratures) > 0


def test_validate_detects_vanishing_weight():
    s = scalar_system(
        p=lambda x: 1.0,
        q=lambda x: 0.0,
        w=lambda x: 0.0,
        a=0.0,
        b=1.0,
        kind_a="regular",
        kind_b="regular",
        anchor=0.0,
        name="no_weight",
    )
    report = validate_assumptions(s, AtkinsonProbe(0.0, 1.0))
    assert not report.atkinson_pass
    assert not report.passed
