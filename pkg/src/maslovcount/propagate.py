"""Integration of ``J M' = (B0 + λ B1) M`` for fundamental matrices and frames.

Fundamental matrices are integrated as they are, since their entries are the
data of the endpoint diagnostics. Frames (``2n × n`` solutions whose span is
all that matters) are re-orthonormalized whenever their norm has grown by a
fixed factor, which keeps them representable over arbitrarily long ranges.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import OdeSolution, solve_ivp

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractViolation, IntegrationStall
from .numerics import CArray, orthonormalize, symplectic_j
from .system import HamiltonianSystem

METHOD = "DOP853"


@dataclass(frozen=True)
class Frame:
    """A ``2n × k`` matrix whose columns span a subspace, coordinatized as ``(X; Y)``."""

    mat: CArray
    label: str = ""

    def __post_init__(self) -> None:
        m = np.array(self.mat, dtype=complex)
        if m.ndim == 1:
            m = m.reshape(-1, 1)
        if m.shape[0] % 2:
            raise ContractViolation(f"frame must have an even number of rows, got {m.shape}")
        if np.linalg.matrix_rank(m, tol=1e-10 * max(1.0, np.linalg.norm(m))) < m.shape[1]:
            raise ContractViolation("frame columns are linearly dependent")
        object.__setattr__(self, "mat", m)

    @property
    def n(self) -> int:
        return self.mat.shape[0] // 2

    @property
    def X(self) -> CArray:
        return self.mat[: self.n]

    @property
    def Y(self) -> CArray:
        return self.mat[self.n :]

    def lagrangian_defect(self) -> float:
        """``‖F* J F‖ / ‖F‖²`` (zero for a Lagrangian frame)."""
        j = symplectic_j(self.n)
        return float(np.linalg.norm(self.mat.conj().T @ j @ self.mat, 2) / np.linalg.norm(self.mat, 2) ** 2)

    def is_lagrangian(self, tol: float = DEFAULT_TOLERANCES.lagrangian) -> bool:
        return self.mat.shape[1] == self.n and self.lagrangian_defect() <= tol

    def normalized(self) -> "Frame":
        """Same span, orthonormal columns."""
        return Frame(orthonormalize(self.mat), self.label)


@dataclass(frozen=True)
class Trajectory:
    """Samples of a matrix solution.

    Attributes:
        lam: Spectral parameter.
        x0: Base point where the initial value was imposed.
        xs: Strictly increasing sample abscissae.
        values: Array of shape ``(len(xs), 2n, m)``.
        quadrature: Optional ``(len(xs), m, m)`` array of ``∫_{x0}^{x} M* B1 M``.
        stats: Integrator statistics (function evaluations, steps).
    """

    lam: complex
    x0: float
    xs: NDArray[np.float64]
    values: CArray
    quadrature: CArray | None = None
    stats: dict = field(default_factory=dict)

    def at(self, x: float) -> CArray:
        """Value at a sampled abscissa."""
        k = int(np.argmin(np.abs(self.xs - x)))
        if not math.isclose(self.xs[k], x, rel_tol=1e-12, abs_tol=1e-14):
            raise ContractViolation(f"x = {x} is not a sample abscissa")
        return self.values[k]


def _rhs(sys: HamiltonianSystem, lam: complex, dim: int, ncols: int, quad: bool):
    jinv = -symplectic_j(sys.n)
    size = dim * ncols
    n1 = sys.n

    if sys.sturm is not None and not quad:
        # y = (u, p u'): u' = v / p and v' = (q - λ w) u.
        p_fn, q_fn, w_fn = sys.sturm.p, sys.sturm.q, sys.sturm.w

        def f(x, y):
            yy = y.reshape(2, ncols)
            return np.concatenate([yy[1] / p_fn(x), (q_fn(x) - lam * w_fn(x)) * yy[0]])

        return f

    if n1 == 1 and not quad:

        def f(x, y):
            m = sys.B0(x) + lam * sys.B1(x)
            yy = y.reshape(2, ncols)
            # -J M Y with J = [[0,-1],[1,0]] written out for speed.
            my = m @ yy
            return np.concatenate([my[1], -my[0]])

        return f

    def f(x, y):
        b1 = sys.B1(x)
        m = sys.B0(x) + lam * b1
        yy = y[:size].reshape(dim, ncols)
        dy = jinv @ (m @ yy)
        if not quad:
            return dy.ravel()
        dq = yy.conj().T @ b1 @ yy
        return np.concatenate([dy.ravel(), dq.ravel()])

    return f


def _check_abscissae(sys: HamiltonianSystem, xs: NDArray, tol: Tolerances) -> None:
    lo = sys.a if sys.kind_a == "regular" else sys.a + tol.min_approach * max(1.0, abs(sys.a))
    hi = sys.b if sys.kind_b == "regular" else sys.b - tol.min_approach * max(1.0, abs(sys.b))
    if np.any(xs < lo) or np.any(xs > hi):
        raise ContractViolation(f"abscissae must lie within [{lo}, {hi}]")


def _solve(f, x0: float, x1: float, y0: NDArray, tol: Tolerances, t_eval=None, dense=False, events=None):
    sol = solve_ivp(
        f,
        (x0, x1),
        y0,
        method=METHOD,
        rtol=tol.ode_rtol,
        atol=tol.ode_atol,
        t_eval=t_eval,
        dense_output=dense,
        events=events,
    )
    if sol.status == -1:
        last = float(sol.t[-1]) if sol.t.size else x0
        raise IntegrationStall(f"integration stalled at x = {last}: {sol.message}", last_x=last)
    return sol


def _dtype(sys: HamiltonianSystem, lam: complex, y0: NDArray) -> type:
    if sys.real_coefficients and complex(lam).imag == 0 and np.isrealobj(y0):
        return float
    return complex


def integrate_matrix(
    sys: HamiltonianSystem,
    lam: complex,
    y0: ArrayLike,
    x0: float,
    xs: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    quadrature: bool = False,
) -> Trajectory:
    """Integrate a matrix solution with ``Y(x0) = y0`` and sample it at ``xs``.

    Targets on both sides of ``x0`` are allowed; each side is integrated from
    ``x0`` outward. With ``quadrature=True`` the matrix ``∫_{x0}^{x} Y* B1 Y`` is
    accumulated alongside the solution.
    """
    xs = np.unique(np.asarray(xs, dtype=float))
    _check_abscissae(sys, xs, tol)
    y0 = np.asarray(y0)
    if y0.ndim == 1:
        y0 = y0.reshape(-1, 1)
    dim, ncols = y0.shape
    if dim != sys.dim:
        raise ContractViolation(f"initial value must have {sys.dim} rows, got {dim}")
    lam_c = complex(lam)
    dtype = _dtype(sys, lam_c, y0)
    lam_arg = lam_c.real if dtype is float else lam_c
    f = _rhs(sys, lam_arg, dim, ncols, quadrature)
    state0 = y0.astype(dtype).ravel()
    if quadrature:
        state0 = np.concatenate([state0, np.zeros(ncols * ncols, dtype=dtype)])
    out = np.empty((xs.size, dim, ncols), dtype=complex)
    quad = np.empty((xs.size, ncols, ncols), dtype=complex) if quadrature else None
    stats = {"nfev": 0, "steps": 0}
    for side in (xs < x0, xs > x0):
        targets = xs[side]
        if targets.size == 0:
            continue
        end = targets.min() if targets[0] < x0 else targets.max()
        order = np.argsort(targets)
        if end < x0:
            order = order[::-1]
        sol = _solve(f, x0, end, state0, tol, t_eval=targets[order])
        stats["nfev"] += sol.nfev
        stats["steps"] += max(sol.t.size - 1, 0)
        idx = np.flatnonzero(side)[order]
        vals = sol.y.T
        out[idx] = vals[:, : dim * ncols].reshape(-1, dim, ncols)
        if quadrature:
            quad[idx] = vals[:, dim * ncols :].reshape(-1, ncols, ncols)
    at_base = xs == x0
    if np.any(at_base):
        out[at_base] = y0
        if quadrature:
            quad[at_base] = 0.0
    if quadrature:
        quad = 0.5 * (quad + np.conj(np.swapaxes(quad, 1, 2)))
    return Trajectory(lam=lam_c, x0=float(x0), xs=xs, values=out, quadrature=quad, stats=stats)


def fundamental_matrix(
    sys: HamiltonianSystem,
    lam: complex,
    xs: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    quadrature: bool = False,
) -> Trajectory:
    """Fundamental matrix ``Φ(x; λ)`` with ``Φ(c; λ) = I`` at the anchor ``c``.

    Args:
        sys: The system.
        lam: Spectral parameter.
        xs: Target abscissae inside the interval.
        tol: Integrator tolerances.
        quadrature: Also accumulate ``B(x; λ) = ∫_c^x Φ* B1 Φ``.
    """
    return integrate_matrix(sys, lam, np.eye(sys.dim), sys.anchor, xs, tol, quadrature)


@dataclass
class _Segment:
    lo: float
    hi: float
    sol: OdeSolution


@dataclass(frozen=True)
class FrameTrajectory:
    """A transported frame, available at any abscissa between its ends.

    Only the column span is meaningful: columns are re-orthonormalized at the
    start of every segment. The orthonormalization keeps the orientation, so
    the returned frames vary continuously in ``x``; ``flip`` reverses the
    first column to choose the opposite orientation.
    """

    lam: complex
    x0: float
    lo: float
    hi: float
    dim: int
    ncols: int
    segments: tuple
    label: str = ""
    flip: bool = False

    def __call__(self, x: float) -> CArray:
        if x < self.lo - 1e-12 * max(1.0, abs(self.lo)) or x > self.hi + 1e-12 * max(1.0, abs(self.hi)):
            raise ContractViolation(f"x = {x} outside transported range [{self.lo}, {self.hi}]")
        for seg in self.segments:
            if seg.lo <= x <= seg.hi:
                return self._orient(orthonormalize(seg.sol(x).reshape(self.dim, self.ncols)))
        seg = min(self.segments, key=lambda s: min(abs(x - s.lo), abs(x - s.hi)))
        return self._orient(orthonormalize(seg.sol(min(max(x, seg.lo), seg.hi)).reshape(self.dim, self.ncols)))

    def _orient(self, q: CArray) -> CArray:
        if self.flip:
            q[:, 0] = -q[:, 0]
        return q

    def flipped(self) -> "FrameTrajectory":
        """The same trajectory with the opposite orientation."""
        return replace(self, flip=not self.flip)

    def frame(self, x: float) -> Frame:
        return Frame(self(x), self.label)

    def breakpoints(self) -> NDArray[np.float64]:
        """Integrator step abscissae (a natural sampling grid for flows)."""
        pts = [np.asarray(seg.sol.ts) for seg in self.segments]
        return np.unique(np.concatenate(pts)) if pts else np.array([self.x0])


def transport_frame(
    sys: HamiltonianSystem,
    lam: complex,
    frame: ArrayLike,
    x0: float,
    x_end: float | ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    label: str = "",
) -> FrameTrajectory:
    """Transport a frame from ``x0`` to ``x_end`` (either direction, or both).

    ``x_end`` may be a single abscissa or a collection; the frame is carried
    from ``x0`` to the smallest and to the largest of them. Columns are
    orthonormalized whenever the norm has grown by ``tol.growth_restart``.
    """
    f0 = np.asarray(frame)
    if f0.ndim == 1:
        f0 = f0.reshape(-1, 1)
    Frame(f0)
    dim, ncols = f0.shape
    if dim != sys.dim:
        raise ContractViolation(f"frame must have {sys.dim} rows, got {dim}")
    ends = np.atleast_1d(np.asarray(x_end, dtype=float))
    _check_abscissae(sys, np.concatenate([ends, [x0]]), tol)
    lam_c = complex(lam)
    dtype = _dtype(sys, lam_c, f0)
    lam_arg = lam_c.real if dtype is float else lam_c
    f = _rhs(sys, lam_arg, dim, ncols, False)
    limit = math.log(tol.growth_restart)

    def grow(x, y):
        return math.log(max(np.abs(y).max(), 1e-300)) - limit

    grow.terminal = True
    grow.direction = 1

    segments: list[_Segment] = []
    for end in sorted({float(ends.min()), float(ends.max())} - {float(x0)}):
        start = float(x0)
        y = orthonormalize(f0) if dtype is complex else orthonormalize(f0).real
        while True:
            sol = _solve(f, start, end, y.ravel(), tol, dense=True, events=grow)
            stop = float(sol.t[-1])
            segments.append(_Segment(min(start, stop), max(start, stop), sol.sol))
            if sol.status != 1 or stop == end:
                break
            y = orthonormalize(sol.y[:, -1].reshape(dim, ncols))
            if dtype is float:
                y = y.real
            start = stop
    if not segments:
        # Degenerate transport (x_end == x0): a constant segment.
        const = orthonormalize(f0)

        class _Const:
            ts = np.array([x0])

            def __call__(self, x):
                return const.ravel()

        segments.append(_Segment(float(x0), float(x0), _Const()))
    lo = min(float(ends.min()), float(x0))
    hi = max(float(ends.max()), float(x0))
    return FrameTrajectory(lam_c, float(x0), lo, hi, dim, ncols, tuple(segments), label)


def symplectic_drift(traj: Trajectory, traj_bar: Trajectory, relative: bool = False) -> float:
    """Largest defect of ``Φ(x; conj λ)* (J/i) Φ(x; λ) = J/i`` over the samples.

    Args:
        traj: Trajectory at λ.
        traj_bar: Trajectory at ``conj(λ)`` (the same object for real λ).
        relative: Divide each defect by ``‖Φ(x; conj λ)‖ ‖Φ(x; λ)‖``, the
            magnitude below which rounding in the product is unavoidable.
    """
    if traj.xs.shape != traj_bar.xs.shape or not np.allclose(traj.xs, traj_bar.xs, rtol=0, atol=0):
        raise ContractViolation("trajectories must share abscissae")
    if traj.x0 != traj_bar.x0:
        raise ContractViolation("trajectories must share the base point")
    if not np.isclose(traj_bar.lam, np.conj(traj.lam)):
        raise ContractViolation("second trajectory must be at the conjugate parameter")
    n = traj.values.shape[1] // 2
    jn = symplectic_j(n) / 1j
    worst = 0.0
    for p, pb in zip(traj.values, traj_bar.values):
        d = np.linalg.norm(pb.conj().T @ jn @ p - jn, 2)
        if relative:
            d /= np.linalg.norm(pb, 2) * np.linalg.norm(p, 2)
        worst = max(worst, float(d))
    return worst


def _pair_rhs(sys: HamiltonianSystem, lam: complex):
    jinv = -symplectic_j(sys.n)
    d = sys.dim

    def f(x, s):
        b1 = sys.B1(x)
        m = sys.B0(x) + lam * b1
        y = s[:d]
        z = s[d : 2 * d]
        dq = np.vdot(z, b1 @ y)
        return np.concatenate([jinv @ (m @ y), jinv @ (m @ z), [dq]])

    return f


def green_identity_defect(
    sys: HamiltonianSystem,
    lam: complex,
    y0: ArrayLike,
    z0: ArrayLike,
    c: float,
    d: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Defect of ``2i Im λ ⟨y, z⟩ = (Jy, z)(d) - (Jy, z)(c)`` on ``[c, d]``.

    ``y`` and ``z`` are the solutions with ``y(c) = y0`` and ``z(c) = z0``; the
    weighted inner product ``∫ z* B1 y`` is integrated alongside them.
    """
    y0 = np.asarray(y0, dtype=complex).ravel()
    z0 = np.asarray(z0, dtype=complex).ravel()
    if y0.size != sys.dim or z0.size != sys.dim:
        raise ContractViolation(f"initial vectors must have {sys.dim} entries")
    _check_abscissae(sys, np.array([c, d]), tol)
    f = _pair_rhs(sys, complex(lam))
    sol = _solve(f, c, d, np.concatenate([y0, z0, [0.0]]).astype(complex), tol)
    end = sol.y[:, -1]
    dm = sys.dim
    j = symplectic_j(sys.n)
    yd, zd, inner = end[:dm], end[dm : 2 * dm], end[-1]
    boundary = np.vdot(zd, j @ yd) - np.vdot(z0, j @ y0)
    return float(abs(2j * complex(lam).imag * inner - boundary))


def solution_quadrature(
    sys: HamiltonianSystem, lam: complex, y0: ArrayLike, c: float, d: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """``∫_c^d (B1 y, y)`` for the solution with ``y(c) = y0``."""
    traj = integrate_matrix(sys, lam, np.asarray(y0).reshape(-1, 1), c, [d], tol, quadrature=True)
    return float(traj.quadrature[-1, 0, 0].real)
