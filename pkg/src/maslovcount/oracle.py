"""Brute-force eigenvalue counters that share no code with the Maslov machinery.

Both counters work on scalar problems ``-(p u')' + q u = λ w u`` on a bounded
interval ``[c, d]`` with separated conditions ``α1 u + α2 p u' = 0`` at
``c`` and ``β1 u + β2 p u' = 0`` at ``d``.

* ``pruefer_count`` integrates the Prüfer angle, which increases with λ and
  passes the right boundary angle once for each eigenvalue below λ.
* ``disc_count`` discretizes with linear finite elements and a lumped mass
  matrix, and counts eigenvalues below λ by the inertia of the shifted
  tridiagonal matrix (Sylvester's law).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractViolation, IntegrationStall, RefinementRequired
from .numerics import symplectic_j
from .propagate import fundamental_matrix
from .system import BoundaryMatrixAlpha, HamiltonianSystem, scalar_system


@dataclass(frozen=True)
class TruncatedProblem:
    """A scalar system restricted to ``[c, d]`` with separated boundary conditions.

    Attributes:
        sys: System with a scalar form (``sys.sturm`` set).
        c: Left end.
        d: Right end.
        left: Boundary row ``(α1, α2)`` at ``c`` acting on ``(u, p u')``.
        right: Boundary row ``(β1, β2)`` at ``d``.
    """

    sys: HamiltonianSystem
    c: float
    d: float
    left: BoundaryMatrixAlpha
    right: BoundaryMatrixAlpha

    def __post_init__(self) -> None:
        if self.sys.n != 1 or self.sys.sturm is None:
            raise ContractViolation("oracles need a scalar system with a Sturm-Liouville form")
        if not self.sys.a <= self.c < self.d <= self.sys.b:
            raise ContractViolation(f"[{self.c}, {self.d}] must lie inside [{self.sys.a}, {self.sys.b}]")
        for name, bc in (("left", self.left), ("right", self.right)):
            row = bc.alpha[0]
            if np.abs(row.imag).max() > 1e-10 * np.abs(row).max():
                raise ContractViolation(f"{name} boundary row must be real (up to a common phase)")

    def row(self, side: str) -> tuple[float, float]:
        """Real boundary row at ``"left"`` or ``"right"``, scaled to unit length."""
        r = (self.left if side == "left" else self.right).alpha[0].real
        r = r / np.linalg.norm(r)
        return float(r[0]), float(r[1])

    def regular_system(self) -> HamiltonianSystem:
        """The same coefficients as a system with two regular endpoints ``[c, d]``."""
        st = self.sys.sturm
        return scalar_system(
            p=st.p,
            q=st.q,
            w=st.w,
            a=self.c,
            b=self.d,
            kind_a="regular",
            kind_b="regular",
            anchor=self.c,
            name=f"{self.sys.name}[{self.c},{self.d}]",
            params=dict(self.sys.params),
        )


def _real_row(row: ArrayLike) -> BoundaryMatrixAlpha:
    r = np.asarray(row, dtype=complex).ravel()
    k = int(np.argmax(np.abs(r)))
    r = r * (abs(r[k]) / r[k])
    # Rows derived from limit conditions at a truncation point are real only
    # to the truncation error, so the check is loose.
    if np.abs(r.imag).max() > 1e-3 * np.abs(r).max():
        raise ContractViolation(f"boundary row {row} is not real up to a common phase")
    return BoundaryMatrixAlpha(r.real.reshape(1, 2).astype(complex))


def _angle(row: tuple[float, float]) -> float:
    """Prüfer angle in ``[0, π)`` of the condition ``r1 sin θ + r2 cos θ = 0``."""
    r1, r2 = row
    return math.atan2(-r2, r1) % math.pi


def _pruefer_end(prob: TruncatedProblem, lam: float, tol: Tolerances) -> float:
    st = prob.sys.sturm

    def f(x, th):
        s, c = math.sin(th[0]), math.cos(th[0])
        return [c * c / st.p(x) + (lam * st.w(x) - st.q(x)) * s * s]

    th0 = _angle(prob.row("left"))
    sol = solve_ivp(f, (prob.c, prob.d), [th0], method="DOP853", rtol=tol.ode_rtol, atol=tol.ode_atol)
    if sol.status == -1:
        raise IntegrationStall(f"Prüfer integration stalled: {sol.message}", last_x=float(sol.t[-1]))
    return float(sol.y[0, -1])


def _below(prob: TruncatedProblem, lam: float, tol: Tolerances) -> int:
    theta = _pruefer_end(prob, lam, tol)
    right = _angle(prob.row("right"))
    if right == 0.0:
        right = math.pi
    return max(0, math.ceil((theta - right) / math.pi))


def pruefer_count(prob: TruncatedProblem, lambda1: float, lambda2: float, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Number of eigenvalues in ``[λ1, λ2)`` from the Prüfer angle at ``d``.

    With ``u = r sin θ`` and ``p u' = r cos θ`` the angle obeys
    ``θ' = cos²θ / p + (λ w - q) sin²θ``. It starts at the left boundary angle
    in ``[0, π)`` and the ``k``-th eigenvalue is where ``θ(d)`` reaches the
    right boundary angle plus ``kπ``.
    """
    if not lambda1 < lambda2:
        raise ContractViolation("need lambda1 < lambda2")
    return _below(prob, lambda2, tol) - _below(prob, lambda1, tol)


def _mesh(prob: TruncatedProblem, mesh: float | ArrayLike) -> NDArray[np.float64]:
    if np.ndim(mesh) == 0:
        h = float(mesh)
        if h <= 0:
            raise ContractViolation("mesh width must be positive")
        k = max(2, int(math.ceil((prob.d - prob.c) / h)))
        return np.linspace(prob.c, prob.d, k + 1)
    nodes = np.asarray(mesh, dtype=float)
    if nodes.ndim != 1 or nodes.size < 3 or np.any(np.diff(nodes) <= 0):
        raise ContractViolation("mesh nodes must be increasing")
    if not (math.isclose(nodes[0], prob.c) and math.isclose(nodes[-1], prob.d)):
        raise ContractViolation("mesh nodes must start at c and end at d")
    return nodes


def _assemble(prob: TruncatedProblem, nodes: NDArray) -> tuple[NDArray, NDArray, NDArray]:
    """Tridiagonal stiffness (diagonal, off-diagonal) and lumped mass, after boundary terms."""
    st = prob.sys.sturm
    h = np.diff(nodes)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    pk = np.array([st.p(x) for x in mids]) / h
    share = np.zeros(nodes.size)
    share[:-1] += 0.5 * h
    share[1:] += 0.5 * h
    qn = np.array([st.q(x) for x in nodes])
    wn = np.array([st.w(x) for x in nodes])
    diag = qn * share
    diag[:-1] += pk
    diag[1:] += pk
    off = -pk.copy()
    mass = wn * share
    keep = np.ones(nodes.size, dtype=bool)
    a1, a2 = prob.row("left")
    b1, b2 = prob.row("right")
    # Weak form boundary terms: p u'(c) = -(α1/α2) u(c) and p u'(d) = -(β1/β2) u(d).
    if abs(a2) > 1e-14:
        diag[0] += -a1 / a2
    else:
        keep[0] = False
    if abs(b2) > 1e-14:
        diag[-1] += b1 / b2
    else:
        keep[-1] = False
    idx = np.flatnonzero(keep)
    diag, mass = diag[idx], mass[idx]
    off = off[idx[0] : idx[-1]]
    return diag, off, mass


def _negative_pivots(diag: NDArray, off: NDArray, mass: NDArray, lam: float) -> int:
    a = diag - lam * mass
    off2 = off * off
    neg = 0
    d = a[0]
    if d < 0:
        neg += 1
    tiny = np.finfo(float).tiny
    for i in range(1, a.size):
        if d == 0.0:
            d = tiny
        d = a[i] - off2[i - 1] / d
        if d < 0:
            neg += 1
    return neg


def _disc_once(prob: TruncatedProblem, nodes: NDArray, lambda1: float, lambda2: float) -> int:
    diag, off, mass = _assemble(prob, nodes)
    return _negative_pivots(diag, off, mass, lambda2) - _negative_pivots(diag, off, mass, lambda1)


def _refine(nodes: NDArray) -> NDArray:
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    out = np.empty(2 * nodes.size - 1)
    out[0::2] = nodes
    out[1::2] = mids
    return out


def disc_count(
    prob: TruncatedProblem, lambda1: float, lambda2: float, mesh: float | ArrayLike = 1e-2, check: bool = True
) -> int:
    """Number of eigenvalues of the discretized problem in ``[λ1, λ2)``.

    Args:
        prob: The truncated problem.
        lambda1: Lower end.
        lambda2: Upper end (excluded).
        mesh: Uniform width, or an increasing array of nodes from ``c`` to ``d``.
        check: Recount on the mesh refined by halving every cell.

    Raises:
        RefinementRequired: when the count changes under refinement.
    """
    if not lambda1 < lambda2:
        raise ContractViolation("need lambda1 < lambda2")
    nodes = _mesh(prob, mesh)
    n1 = _disc_once(prob, nodes, lambda1, lambda2)
    if check:
        n2 = _disc_once(prob, _refine(nodes), lambda1, lambda2)
        if n1 != n2:
            raise RefinementRequired("discrete count changed under mesh refinement", coarse=n1, fine=n2)
    return n1


def graded_mesh(c: float, d: float, h: float, h0: float, ratio: float = 1.05) -> NDArray[np.float64]:
    """Nodes growing geometrically from width ``h0`` at ``c`` up to ``h``, then uniform."""
    if not (0 < h0 <= h):
        raise ContractViolation("need 0 < h0 <= h")
    nodes = [c]
    step = h0
    while nodes[-1] + step < d:
        nodes.append(nodes[-1] + step)
        step = min(h, step * ratio)
    nodes.append(d)
    if nodes[-1] - nodes[-2] < 0.25 * step and len(nodes) > 2:
        nodes.pop(-2)
    return np.asarray(nodes)


def free_particle(length: float = math.pi) -> TruncatedProblem:
    """``-u'' = λ u`` on ``[0, length]`` with Dirichlet conditions."""
    sys = scalar_system(lambda x: 1.0, lambda x: 0.0, lambda x: 1.0, 0.0, length, "regular", "regular", 0.0, "free")
    dirichlet = BoundaryMatrixAlpha(np.array([[1.0, 0.0]], dtype=complex))
    return TruncatedProblem(sys, 0.0, length, dirichlet, dirichlet)


def harmonic_oscillator(half_width: float = 8.0) -> TruncatedProblem:
    """``-u'' + x² u = λ u`` on ``[-L, L]`` with Dirichlet conditions."""
    sys = scalar_system(
        lambda x: 1.0, lambda x: x * x, lambda x: 1.0, -half_width, half_width, "regular", "regular", -half_width, "oscillator"
    )
    dirichlet = BoundaryMatrixAlpha(np.array([[1.0, 0.0]], dtype=complex))
    return TruncatedProblem(sys, -half_width, half_width, dirichlet, dirichlet)


def truncate(
    sys: HamiltonianSystem, c: float, d: float, left: ArrayLike, right: ArrayLike
) -> TruncatedProblem:
    """Restrict a scalar system to ``[c, d]`` with boundary rows ``left`` and ``right``."""
    return TruncatedProblem(sys, float(c), float(d), _real_row(left), _real_row(right))


def hydrogen_transformed(
    sys: HamiltonianSystem,
    U_coeffs: ArrayLike,
    lambda0: complex,
    x0: float = 1e-4,
    x_end: float = 60.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TruncatedProblem:
    """Truncated form ``-ψ'' - (γ/x) ψ = λ ψ`` of the radial problem with ``ψ = x u``.

    The left condition is the limit condition ``U(x0; λ0)* J y(x0) = 0`` of the
    boundary frame ``U = Φ(·; λ0) R``, rewritten for ``ψ`` through
    ``y1 = ψ / x`` and ``y2 = x² u' = x ψ' - ψ``. The right end is Dirichlet.

    Args:
        sys: The radial system (``hydrogen_radial``).
        U_coeffs: The ``2 × 1`` coefficients ``R`` of the boundary frame.
        lambda0: Non-real parameter of the boundary frame.
        x0: Left truncation point.
        x_end: Right truncation point.
        tol: Tolerances.
    """
    if sys.name != "hydrogen_radial":
        raise ContractViolation("hydrogen_transformed needs the hydrogen_radial system")
    gamma = float(sys.params.get("gamma", 4.0))
    ell = int(sys.params.get("ell", 0))
    phi0 = fundamental_matrix(sys, lambda0, [x0], tol).values[0]
    u = phi0 @ np.asarray(U_coeffs, dtype=complex).reshape(2, 1)
    ell_row = (u.conj().T @ symplectic_j(1)).ravel()
    l1, l2 = ell_row
    psi_row = np.array([l1 / x0 - l2, l2 * x0])
    transformed = scalar_system(
        p=lambda x: 1.0,
        q=lambda x: ell * (ell + 1.0) / (x * x) - gamma / x,
        w=lambda x: 1.0,
        a=0.0,
        b=math.inf,
        kind_a="singular",
        kind_b="singular",
        anchor=1.0,
        name="hydrogen_psi",
        params={"gamma": gamma, "ell": ell},
    )
    dirichlet = np.array([1.0, 0.0])
    return truncate(transformed, x0, x_end, psi_row, dirichlet)

