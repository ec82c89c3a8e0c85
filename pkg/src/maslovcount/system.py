"""Hamiltonian system definitions, built-in problems and assumption checks.

A system is ``J y' = (B0(x) + λ B1(x)) y`` on ``(a, b)`` with ``J`` the
standard symplectic matrix and Hermitian coefficient maps. Scalar
Sturm-Liouville problems ``-(p u')' + q u = λ w u`` are written in this form
with ``y = (u, p u')``, ``B0 = diag(-q, 1/p)`` and ``B1 = diag(w, 0)``.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractViolation
from .expr import parse_expression
from .numerics import as_cmatrix, kernel_dim, symplectic_j

CoefficientMap = Callable[[float], NDArray]

ENDPOINT_KINDS = ("regular", "singular")


@dataclass(frozen=True)
class SturmLiouvilleForm:
    """Scalar form ``-(p u')' + q u = λ w u`` of an ``n = 1`` system."""

    p: Callable[[float], float]
    q: Callable[[float], float]
    w: Callable[[float], float]


@dataclass(frozen=True)
class ProblemDefaults:
    """Run settings that reproduce the reference computations for a built-in.

    Attributes:
        lambda0: Non-real spectral parameter used for endpoint classification.
        lambda1: Lower end of the counting interval.
        lambda2: Upper end of the counting interval.
        alpha: Boundary matrix at a regular left endpoint.
        beta_a: Niessen circle parameters at a singular left endpoint.
        beta_b: Niessen circle parameters at a singular right endpoint.
        probe_a: Offset from ``a`` of the deepest classification probe.
        probe_b_complex: Deepest probe toward ``b`` for the complex-λ curve.
        probe_b_real: Deepest probe toward ``b`` for the real-λ curve.
        x_min_offset: Offset from ``a`` where a singular left frame starts.
        x_max: Right truncation of the counting path.
        gap: Known spectral gap (essential spectrum avoided), if any.
    """

    lambda0: complex = 1j
    lambda1: float = -1.0
    lambda2: float = 1.0
    alpha: tuple[complex, ...] | None = None
    beta_a: tuple[complex, ...] | None = None
    beta_b: tuple[complex, ...] | None = None
    probe_a: float = 1e-5
    probe_b_complex: float = 20.0
    probe_b_real: float = 20.0
    x_min_offset: float = 1e-5
    x_max: float = 50.0
    gap: tuple[float, float] | None = None


@dataclass(frozen=True)
class HamiltonianSystem:
    """A linear Hamiltonian system ``J y' = (B0 + λ B1) y``.

    Attributes:
        n: Block dimension; the state has ``2n`` components.
        B0: Coefficient map ``x -> 2n×2n`` Hermitian matrix.
        B1: Weight map ``x -> 2n×2n`` Hermitian positive semidefinite matrix.
        a: Left endpoint (may be ``-inf``).
        b: Right endpoint (may be ``+inf``).
        kind_a: ``"regular"`` or ``"singular"``.
        kind_b: ``"regular"`` or ``"singular"``.
        anchor: Base point ``c`` where the fundamental matrix is the identity.
            It may coincide with a regular endpoint.
        name: Identifier used in reports.
        params: Parameters the system was built from.
        real_coefficients: True when ``B0`` and ``B1`` are real, so that the
            fundamental matrix at ``conj(λ)`` is the conjugate of the one at λ.
        attest_c: User attestation of the limit-dimension hypothesis for
            systems with complex coefficients (it holds automatically for real
            ones).
        sturm: Scalar form, when the system has one (used by the oracles).
        defaults: Reference run settings.
    """

    n: int
    B0: CoefficientMap
    B1: CoefficientMap
    a: float
    b: float
    kind_a: str
    kind_b: str
    anchor: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    real_coefficients: bool = True
    attest_c: bool = False
    sturm: SturmLiouvilleForm | None = None
    defaults: ProblemDefaults = field(default_factory=ProblemDefaults)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ContractViolation("n must be positive")
        if not self.a < self.b:
            raise ContractViolation(f"need a < b, got ({self.a}, {self.b})")
        for kind in (self.kind_a, self.kind_b):
            if kind not in ENDPOINT_KINDS:
                raise ContractViolation(f"endpoint kind must be one of {ENDPOINT_KINDS}, got {kind!r}")
        if self.kind_a == "regular" and not math.isfinite(self.a):
            raise ContractViolation("a regular left endpoint must be finite")
        if self.kind_b == "regular" and not math.isfinite(self.b):
            raise ContractViolation("a regular right endpoint must be finite")
        lo_ok = self.anchor > self.a or (self.anchor == self.a and self.kind_a == "regular")
        hi_ok = self.anchor < self.b or (self.anchor == self.b and self.kind_b == "regular")
        if not (lo_ok and hi_ok):
            raise ContractViolation(f"anchor {self.anchor} must lie in ({self.a}, {self.b})")

    @property
    def dim(self) -> int:
        """State dimension ``2n``."""
        return 2 * self.n

    def coefficient(self, x: float, lam: complex) -> NDArray:
        """Return ``B0(x) + λ B1(x)``."""
        return self.B0(x) + lam * self.B1(x)

    def endpoint_value(self, endpoint: str) -> float:
        """Return ``a`` or ``b``."""
        if endpoint not in ("a", "b"):
            raise ContractViolation(f"endpoint must be 'a' or 'b', got {endpoint!r}")
        return self.a if endpoint == "a" else self.b

    def endpoint_kind(self, endpoint: str) -> str:
        """Return the kind (regular or singular) of endpoint ``a`` or ``b``."""
        self.endpoint_value(endpoint)
        return self.kind_a if endpoint == "a" else self.kind_b


@dataclass(frozen=True)
class BoundaryMatrixAlpha:
    """Boundary matrix ``α`` (``n × 2n``) of rank ``n`` with ``α J α* = 0``."""

    alpha: NDArray[np.complex128]

    def __post_init__(self) -> None:
        alpha = as_cmatrix(self.alpha, "alpha")
        if alpha.shape[0] > alpha.shape[1]:
            alpha = alpha.T
        n2 = alpha.shape[1]
        if n2 % 2 or alpha.shape[0] != n2 // 2:
            raise ContractViolation(f"alpha must be n×2n, got shape {alpha.shape}")
        n = n2 // 2
        if kernel_dim(alpha.conj().T, 1e-10) != 0:
            raise ContractViolation("alpha must have rank n")
        defect = np.linalg.norm(alpha @ symplectic_j(n) @ alpha.conj().T)
        if defect > 1e-10 * max(1.0, np.linalg.norm(alpha) ** 2):
            raise ContractViolation(f"alpha J alpha* must vanish (defect {defect:.3e})")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    def frame(self) -> NDArray[np.complex128]:
        """Initial frame ``J α*`` spanning the boundary Lagrangian plane."""
        return symplectic_j(self.n) @ self.alpha.conj().T

    @classmethod
    def from_angle(cls, theta: float) -> "BoundaryMatrixAlpha":
        """Scalar boundary condition ``cos θ y1 + sin θ y2 = 0``."""
        return cls(np.array([[math.cos(theta), math.sin(theta)]], dtype=complex))


def scalar_system(
    p: Callable,
    q: Callable,
    w: Callable,
    a: float,
    b: float,
    kind_a: str,
    kind_b: str,
    anchor: float,
    name: str,
    params: dict | None = None,
    defaults: ProblemDefaults | None = None,
) -> HamiltonianSystem:
    """Build the ``n = 1`` system of ``-(p u')' + q u = λ w u``."""

    def b0(x: float) -> NDArray:
        return np.array([[-q(x), 0.0], [0.0, 1.0 / p(x)]])

    def b1(x: float) -> NDArray:
        return np.array([[w(x), 0.0], [0.0, 0.0]])

    return HamiltonianSystem(
        n=1,
        B0=b0,
        B1=b1,
        a=a,
        b=b,
        kind_a=kind_a,
        kind_b=kind_b,
        anchor=anchor,
        name=name,
        params=dict(params or {}),
        real_coefficients=True,
        sturm=SturmLiouvilleForm(p=p, q=q, w=w),
        defaults=defaults or ProblemDefaults(),
    )


SCHRODINGER_GAP = (-0.3477, 0.5948)


def _schrodinger_gap(params: dict) -> HamiltonianSystem:
    if params:
        raise ContractViolation(f"schrodinger_gap takes no parameters, got {sorted(params)}")
    defaults = ProblemDefaults(
        lambda0=1j,
        lambda1=-0.31,
        lambda2=0.2,
        alpha=(math.cos(math.pi / 8), math.sin(math.pi / 8)),
        probe_b_complex=5.0,
        probe_b_real=5.0,
        x_max=50.0,
        gap=SCHRODINGER_GAP,
    )
    return scalar_system(
        p=lambda x: 1.0,
        q=lambda x: math.sin(x) + 60.0 / (1.0 + x * x),
        w=lambda x: 1.0,
        a=0.0,
        b=math.inf,
        kind_a="regular",
        kind_b="singular",
        anchor=0.0,
        name="schrodinger_gap",
        defaults=defaults,
    )


def _hydrogen_radial(params: dict) -> HamiltonianSystem:
    unknown = set(params) - {"gamma", "ell"}
    if unknown:
        raise ContractViolation(f"unknown hydrogen_radial parameters {sorted(unknown)}")
    gamma = float(params.get("gamma", 4.0))
    ell = float(params.get("ell", 0.0))
    if ell < 0 or ell != int(ell):
        raise ContractViolation("ell must be a nonnegative integer")
    defaults = ProblemDefaults(
        lambda0=1j,
        lambda1=-5.0,
        lambda2=-0.375,
        beta_a=None,
        probe_a=1e-5,
        probe_b_complex=25.0,
        probe_b_real=40.0,
        x_min_offset=1e-5,
        x_max=50.0,
    )
    # y = (φ, x² φ'): p = x², w = x², q = ℓ(ℓ+1) - γ x.
    return scalar_system(
        p=lambda x: x * x,
        q=lambda x: ell * (ell + 1.0) - gamma * x,
        w=lambda x: x * x,
        a=0.0,
        b=math.inf,
        kind_a="singular",
        kind_b="singular",
        anchor=1.0,
        name="hydrogen_radial",
        params={"gamma": gamma, "ell": int(ell)},
        defaults=defaults,
    )


def _constant_demo(params: dict) -> HamiltonianSystem:
    if params:
        raise ContractViolation(f"constant_demo takes no parameters, got {sorted(params)}")
    return scalar_system(
        p=lambda x: 1.0,
        q=lambda x: 0.0,
        w=lambda x: 1.0,
        a=0.0,
        b=math.inf,
        kind_a="regular",
        kind_b="singular",
        anchor=0.0,
        name="constant_demo",
        defaults=ProblemDefaults(alpha=(1.0, 0.0), probe_b_complex=30.0, probe_b_real=30.0),
    )


def _float_param(params: dict, key: str, default: float) -> float:
    value = params.get(key, default)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
    return float(value)


def _custom_expression(params: dict) -> HamiltonianSystem:
    allowed = {"q", "p", "w", "a", "b", "kind_a", "kind_b", "anchor"}
    unknown = set(params) - allowed
    if unknown:
        raise ContractViolation(f"unknown custom_expression parameters {sorted(unknown)}")
    if "q" not in params:
        raise ContractViolation("custom_expression needs a potential expression 'q'")
    q_expr = parse_expression(str(params["q"]))
    p_expr = parse_expression(str(params.get("p", "1")))
    w_expr = parse_expression(str(params.get("w", "1")))
    a = _float_param(params, "a", 0.0)
    b = _float_param(params, "b", math.inf)
    kind_a = str(params.get("kind_a", "regular" if math.isfinite(a) else "singular"))
    kind_b = str(params.get("kind_b", "regular" if math.isfinite(b) else "singular"))
    if "anchor" in params:
        anchor = _float_param(params, "anchor", 0.0)
    elif kind_a == "regular":
        anchor = a
    elif math.isfinite(a) and math.isfinite(b):
        anchor = 0.5 * (a + b)
    elif math.isfinite(a):
        anchor = a + 1.0
    elif math.isfinite(b):
        anchor = b - 1.0
    else:
        anchor = 0.0
    defaults = ProblemDefaults(alpha=(1.0, 0.0) if kind_a == "regular" else None)
    return scalar_system(
        p=lambda x: float(p_expr(x)),
        q=lambda x: float(q_expr(x)),
        w=lambda x: float(w_expr(x)),
        a=a,
        b=b,
        kind_a=kind_a,
        kind_b=kind_b,
        anchor=anchor,
        name="custom_expression",
        params={k: params[k] for k in sorted(params)},
        defaults=defaults,
    )


BUILTINS: dict[str, Callable[[dict], HamiltonianSystem]] = {
    "schrodinger_gap": _schrodinger_gap,
    "hydrogen_radial": _hydrogen_radial,
    "constant_demo": _constant_demo,
    "custom_expression": _custom_expression,
}


def builtin_system(name: str, params: dict | None = None) -> HamiltonianSystem:
    """Construct one of the built-in systems.

    Args:
        name: ``schrodinger_gap``, ``hydrogen_radial``, ``constant_demo`` or
            ``custom_expression``.
        params: Problem parameters (``gamma`` and ``ell`` for the hydrogen
            problem; ``q``, ``p``, ``w``, ``a``, ``b``, ``kind_a``, ``kind_b``,
            ``anchor`` for custom expressions).
    """
    if name not in BUILTINS:
        raise ContractViolation(f"unknown system {name!r}; choose from {sorted(BUILTINS)}")
    return BUILTINS[name](dict(params or {}))


@dataclass(frozen=True)
class AtkinsonProbe:
    """Sampling plan for ``validate_assumptions``.

    Attributes:
        c: Left end of the compact probe interval.
        d: Right end of the compact probe interval.
        count: Number of random solutions.
        seed: Seed for the random initial vectors.
        lam: Real spectral parameter at which solutions are drawn.
        samples: Number of abscissae for the Hermiticity scan.
    """

    c: float
    d: float
    count: int = 5
    seed: int = 0
    lam: float = 0.0
    samples: int = 64


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the numerical assumption checks."""

    hermiticity_defect: float
    hermitian_pass: bool
    quadratures: tuple[float, ...]
    atkinson_pass: bool
    limit_hypothesis: str
    passed: bool


def validate_assumptions(
    sys: HamiltonianSystem, probe: AtkinsonProbe, tol: Tolerances = DEFAULT_TOLERANCES
) -> ValidationReport:
    """Check Hermiticity of the coefficients and Atkinson positivity.

    Each random solution ``y`` of the system (at ``probe.lam``) contributes the
    quadrature of ``(B1 y, y)`` over ``[probe.c, probe.d]``; all of them must be
    strictly positive. Failures are reported, not raised.
    """
    from .propagate import solution_quadrature

    if not (sys.a <= probe.c < probe.d <= sys.b):
        raise ContractViolation("probe interval must lie inside the system interval")
    defect = 0.0
    for x in np.linspace(probe.c, probe.d, probe.samples):
        for m in (sys.B0(x), sys.B1(x)):
            m = np.asarray(m, dtype=complex)
            defect = max(defect, float(np.abs(m - m.conj().T).max()))
    rng = np.random.default_rng(probe.seed)
    quads = []
    for _ in range(probe.count):
        y0 = rng.standard_normal(sys.dim) + 1j * rng.standard_normal(sys.dim)
        y0 /= np.linalg.norm(y0)
        quads.append(solution_quadrature(sys, probe.lam, y0, probe.c, probe.d, tol))
    floor = 1e-14 * (probe.d - probe.c)
    atkinson = all(qv > floor for qv in quads)
    if sys.real_coefficients:
        limit_note = "holds: real coefficients"
    elif sys.attest_c:
        limit_note = "attested by user"
    else:
        limit_note = "unverified: complex coefficients without attestation"
    hermitian = defect <= tol.hermitian
    return ValidationReport(
        hermiticity_defect=defect,
        hermitian_pass=hermitian,
        quadratures=tuple(quads),
        atkinson_pass=atkinson,
        limit_hypothesis=limit_note,
        passed=hermitian and atkinson and not limit_note.startswith("unverified"),
    )


def alpha_matrix(values: ArrayLike) -> BoundaryMatrixAlpha:
    """Build a boundary matrix from a flat row-major list of ``n·2n`` entries."""
    flat = np.asarray(values, dtype=complex).ravel()
    size = flat.size
    n = int(round(math.sqrt(size / 2)))
    if 2 * n * n != size:
        raise ContractViolation(f"alpha needs n·2n entries, got {size}")
    return BoundaryMatrixAlpha(flat.reshape(n, 2 * n))
