"""Maslov index of a pair of Lagrangian paths as a spectral flow through -1.

For Lagrangian frames ``F = (X; Y)`` the matrix

    W̃ = -(X1 + iY1)(X1 - iY1)^{-1} (X2 - iY2)(X2 + iY2)^{-1}

is unitary, and ``dim ker(W̃ + I)`` is the dimension of the intersection of the
two subspaces. The index of a path counts eigenphases of ``W̃`` passing through
``π``: counterclockwise passes count ``+1`` and clockwise passes ``-1``. A phase
sitting at ``π`` at the start of the interval counts only if it leaves
clockwise, and one arriving at the end counts only if it arrives
counterclockwise.

With each phase unwrapped continuously along the path, the count is the
telescoping sum ``Σ_k F(φ_k(t1)) - F(φ_k(t0))`` with
``F(φ) = floor((φ - π) / 2π)``. That closed form implements the endpoint
rules and makes the index exactly additive under subdivision.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractViolation, NumericalInconsistency, RefinementRequired, SingularMatrix
from .numerics import CArray, kernel_dim, orthonormalize, solve, symplectic_j, unitary_eig

FramePair = tuple[ArrayLike, ArrayLike]
PathFunction = Callable[[float], FramePair]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ConjugatePoint:
    """A parameter value where the two subspaces intersect.

    Attributes:
        t: Location on the path parameter.
        multiplicity: Number of eigenphases passing ``π`` there.
        direction: ``+1`` (counterclockwise), ``-1`` (clockwise) or ``0``
            (a touch that does not change the count).
        halfwidth: Half-width of the bracket that localized the point.
    """

    t: float
    multiplicity: int
    direction: int
    halfwidth: float


@dataclass(frozen=True)
class MaslovResult:
    """Outcome of a spectral-flow evaluation.

    Attributes:
        index: Signed count of eigenphase passes through ``π``.
        points: Localized conjugate points, ordered along the path.
        path: Human-readable description of the path.
        t0: Start of the parameter interval.
        t1: End of the parameter interval.
        ts: Sample parameters, ordered from ``t0`` to ``t1``.
        phases: ``(len(ts), n)`` unwrapped eigenphases along the samples.
        unitarity: Largest ``‖W̃*W̃ - I‖`` over the samples.
        kernel_checks: Number of samples at which the two intersection
            dimensions were compared (they agreed at all of them).
    """

    index: int
    points: tuple[ConjugatePoint, ...]
    path: str
    t0: float
    t1: float
    ts: NDArray[np.float64]
    phases: NDArray[np.float64]
    unitarity: float
    kernel_checks: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def directions(self) -> list[int]:
        """Directions of the conjugate points that changed the count."""
        return [p.direction for p in self.points if p.direction != 0]

    def phases_to_csv(self, path: str) -> None:
        """Write ``t, phase_1 .. phase_n`` (wrapped to ``(-π, π]``)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"phase_{k + 1}" for k in range(self.phases.shape[1])])
            for t, row in zip(self.ts, self.phases):
                w.writerow([repr(float(t))] + [repr(float(_wrap(p))) for p in row])

    def points_to_csv(self, path: str) -> None:
        """Write ``t, multiplicity, direction`` for every conjugate point."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "multiplicity", "direction"])
            for p in self.points:
                w.writerow([repr(float(p.t)), p.multiplicity, p.direction])


def _wrap(phi: float) -> float:
    """Map an angle to ``(-π, π]``."""
    w = math.remainder(phi, TWO_PI)
    return math.pi if w == -math.pi else w


def _split(f: ArrayLike) -> tuple[CArray, CArray]:
    m = np.asarray(f, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    n = m.shape[0] // 2
    if m.shape != (2 * n, n):
        raise ContractViolation(f"Lagrangian frame must be 2n×n, got shape {m.shape}")
    return m[:n], m[n:]


def wtilde(f1: ArrayLike, f2: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> CArray:
    """The unitary matrix whose ``-1`` eigenspace detects intersections.

    Args:
        f1: First Lagrangian frame (``2n × n``).
        f2: Second Lagrangian frame of the same size.
        tol: Tolerances; ``tol.unitary`` bounds the accepted defect.

    Raises:
        ContractViolation: when an inverse factor is singular or the result is
            not unitary (both signal a non-Lagrangian frame).
    """
    x1, y1 = _split(f1)
    x2, y2 = _split(f2)
    if x1.shape != x2.shape:
        raise ContractViolation("frames must have the same dimensions")
    try:
        # (X1 + iY1)(X1 - iY1)^{-1} via a transposed solve.
        left = solve((x1 - 1j * y1).T, (x1 + 1j * y1).T, tol.rcond_min).T
        right = solve((x2 + 1j * y2).T, (x2 - 1j * y2).T, tol.rcond_min).T
    except SingularMatrix as exc:
        raise ContractViolation(f"frame is not Lagrangian: {exc}") from exc
    w = -left @ right
    defect = float(np.abs(w.conj().T @ w - np.eye(w.shape[0])).max())
    if defect > tol.unitary:
        raise ContractViolation(f"W̃ is not unitary (defect {defect:.3e}); frames are not Lagrangian")
    return w


def intersection_dim(f1: ArrayLike, f2: ArrayLike, tol: float = DEFAULT_TOLERANCES.kernel) -> int:
    """Dimension of the intersection of two Lagrangian subspaces.

    It is computed as ``dim ker(W̃ + I)`` and cross-checked against
    ``dim ker(F1* J F2)``. For orthonormal frames the singular values of
    ``W̃ + I`` are twice those of ``F1* J F2``, so the first threshold is ``2 tol``.

    Raises:
        NumericalInconsistency: when the two counts disagree.
    """
    q1 = orthonormalize(f1)
    q2 = orthonormalize(f2)
    n = q1.shape[1]
    w = wtilde(q1, q2)
    k1 = kernel_dim(w + np.eye(n), 2.0 * tol, scale=1.0)
    k2 = kernel_dim(q1.conj().T @ symplectic_j(n) @ q2, tol, scale=1.0)
    if k1 != k2:
        raise NumericalInconsistency(
            f"intersection dimensions disagree: ker(W̃+I) = {k1}, ker(F1*JF2) = {k2}", wtilde_dim=k1, wronskian_dim=k2
        )
    return k1


def _floor_count(phi: float, tol: Tolerances) -> int:
    """``floor((φ - π) / 2π)`` with phases within ``tol.phase_fixed`` of ``π`` snapped onto it."""
    s = (phi - math.pi) / TWO_PI
    r = round(s)
    if abs(s - r) * TWO_PI < tol.phase_fixed:
        return int(r)
    return math.floor(s)


def _eigphases(f1: ArrayLike, f2: ArrayLike, tol: Tolerances) -> tuple[NDArray, CArray, float]:
    q1 = orthonormalize(f1)
    q2 = orthonormalize(f2)
    w = wtilde(q1, q2, tol)
    phases, vecs = unitary_eig(w, tol.unitary)
    defect = float(np.linalg.norm(w.conj().T @ w - np.eye(w.shape[0]), 2))
    return phases, vecs, defect


def _match_phases(prev: NDArray, new: NDArray) -> NDArray:
    """Unwrap ``new`` (phases in ``(-π, π]``) onto the continuous branches ``prev``."""
    n = prev.size
    if n == 1:
        d = _wrap(new[0] - prev[0])
        return np.array([prev[0] + d])
    cost = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            cost[i, j] = abs(_wrap(new[j] - prev[i]))
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(n)
    for i, j in zip(rows, cols):
        out[i] = prev[i] + _wrap(new[j] - prev[i])
    return out


class _Sampler:
    """Caches eigenphases along a path and checks the intersection identity."""

    def __init__(self, path: PathFunction, tol: Tolerances, check_kernel: bool) -> None:
        self.path = path
        self.tol = tol
        self.check_kernel = check_kernel
        self.unitarity = 0.0
        self.checks = 0

    def __call__(self, t: float) -> NDArray:
        return self.sample(t)[0]

    def sample(self, t: float) -> tuple[NDArray, float | None]:
        """Eigenphases at ``t`` and, for real frames, the Wronskian determinant sign."""
        f1, f2 = self.path(t)
        phases, _, defect = _eigphases(f1, f2, self.tol)
        self.unitarity = max(self.unitarity, defect)
        if self.check_kernel:
            intersection_dim(f1, f2, self.tol.kernel)
            self.checks += 1
        return phases, _wronskian_sign(f1, f2)


def _wronskian_sign(f1: ArrayLike, f2: ArrayLike) -> float | None:
    """Sign of ``det(Q1ᵀ J Q2)`` for real frames (``None`` for complex ones).

    The positive-diagonal orthonormalization keeps ``Q1`` and ``Q2``
    continuous along a continuous path, so the sign changes exactly when an
    odd number of eigenphases pass through ``π``.
    """
    q1, q2 = orthonormalize(f1), orthonormalize(f2)
    w = q1.conj().T @ symplectic_j(q1.shape[1]) @ q2
    if np.abs(w.imag).max() > 1e-12 * max(1.0, np.abs(w).max()):
        return None
    return float(np.sign(np.linalg.det(w.real)))


def _approach(sampler: _Sampler, t_out: float, t_in: float, ref: NDArray, depart: float) -> tuple[int, int] | None:
    """First clear departure of an eigenphase from ``ref`` on points nearing ``t_in``.

    The points ``t_in + (t_out - t_in) 4^(-j)`` are visited from ``t_out``
    inward. At each one the phases are unwrapped onto ``ref`` by a minimal
    match; the first track whose deviation exceeds ``depart`` (and stays
    clear of ``±π``) is returned with the sign of its deviation.
    """
    h = t_out - t_in
    prev = None
    while True:
        h *= 0.25
        t = t_in + h
        if t == t_in or t == prev:
            return None
        prev = t
        dev = np.array([_wrap(v - r) for v, r in zip(_match_phases(ref, sampler(t)), ref)])
        k = int(np.argmax(np.abs(dev)))
        if depart < abs(dev[k]) < math.pi - depart:
            return k, int(np.sign(dev[k]))


def _hidden_turn(sampler: _Sampler, ta: float, tb: float, pa: NDArray, pb: NDArray, sa: float, tol: Tolerances):
    """Locate a full eigenphase turn between two samples whose phases look unchanged.

    Such a turn happens when one frame sweeps through every direction in a
    window far narrower than the sampling (a frame dominated by a growing
    solution, evaluated near an eigenvalue). The Wronskian sign still flips
    across it. The sign change is bisected until a phase is seen straddling
    ``π`` or the bracket reaches adjacent floating-point numbers. The window
    may be so narrow that the phases inside it are dominated by rounding, so
    the direction is then read from the two approaches instead: coming from ``ta`` the turning phase first leaves its value in
    the direction of the turn, and coming from ``tb`` it returns from the
    opposite side. Approaches that show a departure must agree. When the
    crossing is resolved (the phase sits near ``π`` on both sides of the
    bracket) its direction is read off directly.

    Returns:
        ``(t, track, direction, halfwidth)``.

    Raises:
        RefinementRequired: when the approaches do not show one consistent turn.
    """
    near = 0.1

    def straddles(p_lo: NDArray, p_hi: NDArray) -> int | None:
        # Track whose phase sits within ``near`` of π on opposite sides at the two ends.
        for k in range(p_lo.size):
            d_lo, d_hi = _wrap(p_lo[k] - math.pi), _wrap(p_hi[k] - math.pi)
            if abs(d_lo) < near and abs(d_hi) < near and d_lo * d_hi < 0:
                return k
        return None

    lo, hi = ta, tb
    ph_lo, ph_hi = pa, pb
    for _ in range(200):
        if straddles(ph_lo, _match_phases(ph_lo, ph_hi)) is not None:
            break
        tm = 0.5 * (lo + hi)
        if tm == lo or tm == hi:
            break
        pm, sm = sampler.sample(tm)
        if sm == sa:
            lo, ph_lo = tm, _match_phases(ph_lo, pm)
        else:
            hi, ph_hi = tm, _match_phases(ph_hi, pm)
    t_mid = 0.5 * (lo + hi)
    halfwidth = max(0.5 * abs(hi - lo), float(np.spacing(abs(lo))))
    p_lo = _match_phases(pa, sampler(lo))
    p_hi = _match_phases(p_lo, sampler(hi))
    k = straddles(p_lo, p_hi)
    if k is not None:
        # Resolved: the phase crosses π inside the bracket.
        return t_mid, k, 1 if p_hi[k] > p_lo[k] else -1, halfwidth
    depart = 0.5
    left = _approach(sampler, ta, lo, pa, depart)
    right = _approach(sampler, tb, hi, pb, depart)
    votes = {(left[0], left[1])} if left else set()
    if right:
        votes.add((right[0], -right[1]))
    if len(votes) != 1:
        raise RefinementRequired(
            "Wronskian sign change without a consistent eigenphase turn", t=t_mid, left=left, right=right
        )
    track, direction = votes.pop()
    return t_mid, track, direction, halfwidth


def spectral_flow(
    path: PathFunction,
    t0: float,
    t1: float,
    ts: Sequence[float] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    phase_step: float | None = None,
    description: str = "",
    check_kernel: bool = True,
    max_samples: int = 200000,
    sign_check: bool = True,
) -> MaslovResult:
    """Directed count of eigenphases of ``W̃(t)`` passing ``π`` for ``t`` from ``t0`` to ``t1``.

    ``t1 < t0`` is allowed and traverses the path backward; the index is then
    the negative of the forward one.

    Args:
        path: ``t -> (F1, F2)`` Lagrangian frames.
        t0: Start parameter.
        t1: End parameter.
        ts: Initial samples; they are sorted along the direction of travel and
            clipped to the interval. The ends are always included.
        tol: Tolerances (``phase_step``, ``localization``, ``phase_fixed``).
        phase_step: Largest accepted phase motion between samples; defaults
            to ``tol.phase_step``.
        description: Path label stored in the result.
        check_kernel: Compare both intersection dimensions at every sample.
        max_samples: Safety limit on adaptive refinement.
        sign_check: For real frames, compare the parity of the detected
            crossings with sign changes of the Wronskian determinant and
            locate full turns that fall between samples.

    Raises:
        RefinementRequired: when phases cannot be tracked even at the finest
            admissible spacing.
    """
    if t0 == t1:
        raise ContractViolation("empty parameter interval")
    step = tol.phase_step if phase_step is None else phase_step
    forward = t1 > t0
    lo, hi = min(t0, t1), max(t0, t1)
    grid = np.asarray([] if ts is None else ts, dtype=float)
    grid = grid[(grid > lo) & (grid < hi)]
    grid = np.unique(np.concatenate([[lo, hi], grid]))
    if ts is None:
        grid = np.linspace(lo, hi, 9)
    if not forward:
        grid = grid[::-1]
    sampler = _Sampler(path, tol, check_kernel)
    min_dt = 64 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi))
    alias_width = 1e-6 * (hi - lo)

    out_t = [float(grid[0])]
    first, sign = sampler.sample(grid[0])
    out_p = [np.sort(first)]
    signs = [sign]
    hidden: dict[int, list[tuple[float, int, int, float]]] = {}
    pending = list(grid[1:][::-1])
    while pending:
        t = float(pending[-1])
        raw, sign = sampler.sample(t)
        cand = _match_phases(out_p[-1], raw)
        if np.max(np.abs(cand - out_p[-1])) > step:
            mid = 0.5 * (out_t[-1] + t)
            if abs(t - out_t[-1]) < min_dt or len(out_t) + len(pending) > max_samples:
                raise RefinementRequired(
                    "eigenphases of W̃ cannot be tracked; the path is not resolved", t=t, jump=float(np.max(np.abs(cand - out_p[-1])))
                )
            pending.append(mid)
            continue
        prev_sign = signs[-1]
        turn = None
        if sign_check and sign is not None and prev_sign is not None and sign != 0.0 and prev_sign != 0.0:
            moved = sum(abs(_floor_count(c, tol) - _floor_count(p, tol)) for c, p in zip(cand, out_p[-1]))
            if (sign != prev_sign) != (moved % 2 == 1):
                # Parity mismatch: first assume the phases were aliased and
                # refine; a mismatch that survives on a short interval is a
                # turn too narrow to sample.
                if abs(t - out_t[-1]) > alias_width:
                    pending.append(0.5 * (out_t[-1] + t))
                    continue
                turn = _hidden_turn(sampler, out_t[-1], t, out_p[-1], cand, prev_sign, tol)
        pending.pop()
        if turn is not None:
            hidden.setdefault(len(out_t) - 1, []).append(turn)
            cand = cand.copy()
            cand[turn[1]] += turn[2] * TWO_PI
        out_t.append(t)
        out_p.append(cand)
        signs.append(sign)
    ts_arr = np.array(out_t)
    ph = np.array(out_p)
    counts = np.array([[_floor_count(p, tol) for p in row] for row in ph])
    index = int((counts[-1] - counts[0]).sum())
    points = _localize(sampler, ts_arr, ph, counts, tol, hidden)
    total = sum(p.direction * p.multiplicity for p in points)
    if total != index:
        raise NumericalInconsistency("localized crossings do not add up to the index", index=index, crossings=total)
    return MaslovResult(
        index=index,
        points=tuple(points),
        path=description,
        t0=float(t0),
        t1=float(t1),
        ts=ts_arr,
        phases=ph,
        unitarity=sampler.unitarity,
        kernel_checks=sampler.checks,
    )


def _localize(
    sampler: _Sampler, ts: NDArray, ph: NDArray, counts: NDArray, tol: Tolerances, hidden: dict | None = None
) -> list[ConjugatePoint]:
    """Bisect every sample interval in which a phase changes its ``π``-count.

    Turns already located by the Wronskian sign (``hidden``, keyed by sample
    interval) are reported as they are and removed from the count to bisect.
    """
    raw: list[tuple[float, int, float]] = []
    n = ph.shape[1]
    hidden = hidden or {}
    for i in range(ts.size - 1):
        for k in range(n):
            dc = int(counts[i + 1, k] - counts[i, k])
            for t_h, k_h, d_h, hw_h in hidden.get(i, []):
                if k_h == k:
                    raw.append((t_h, d_h, hw_h))
                    dc -= d_h
            if dc == 0:
                continue
            ta, tb = float(ts[i]), float(ts[i + 1])
            pa = ph[i].copy()
            ca = int(counts[i, k])
            while abs(tb - ta) > 2.0 * tol.localization:
                tm = 0.5 * (ta + tb)
                pm = _match_phases(pa, sampler(tm))
                if _floor_count(pm[k], tol) == ca:
                    ta, pa = tm, pm
                else:
                    tb = tm
            for _ in range(abs(dc)):
                raw.append((0.5 * (ta + tb), int(np.sign(dc)), 0.5 * abs(tb - ta)))
    raw.sort(key=lambda r: r[0], reverse=bool(ts[-1] < ts[0]))
    merged: list[ConjugatePoint] = []
    for t, d, hw in raw:
        if merged and merged[-1].direction == d and abs(merged[-1].t - t) <= merged[-1].halfwidth + hw:
            last = merged[-1]
            merged[-1] = ConjugatePoint(last.t, last.multiplicity + 1, d, max(last.halfwidth, hw))
        else:
            merged.append(ConjugatePoint(t, 1, d, hw))
    return merged


def direction_diagnostic(path: PathFunction, t: float, delta: float, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Direction of motion of the eigenphase nearest ``π`` across ``t``.

    The phases are compared at ``t - delta`` and ``t + delta``; the result is
    ``+1`` for counterclockwise motion, ``-1`` for clockwise and ``0`` when the
    phase does not move.
    """
    before, _, _ = _eigphases(*path(t - delta), tol)
    after, _, _ = _eigphases(*path(t + delta), tol)
    after = _match_phases(np.sort(before), after)
    before = np.sort(before)
    k = int(np.argmin([abs(_wrap(p - math.pi)) for p in before]))
    d = after[k] - before[k]
    return 0 if abs(d) < tol.phase_fixed else int(np.sign(d))


@dataclass(frozen=True)
class NullityResult:
    """Sum of intersection dimensions over the zeros of the Wronskian.

    Attributes:
        total: Sum of the multiplicities.
        locations: ``(t, multiplicity)`` of every detected zero.
    """

    total: int
    locations: tuple[tuple[float, int], ...]


def nullity_sum(
    path: PathFunction,
    ts: Sequence[float],
    tol: Tolerances = DEFAULT_TOLERANCES,
    include_end: bool = False,
) -> NullityResult:
    """Count intersections along a path from the Wronskian ``F1* J F2``.

    For real frames the determinant of the Wronskian is real and changes sign
    at each simple zero; zeros are located by Brent's method. For complex
    frames the local minima of its smallest singular value are refined and
    accepted below ``tol.kernel``. The multiplicity of each zero is the
    Wronskian kernel dimension there.

    Args:
        path: ``t -> (F1, F2)``.
        ts: Increasing samples covering the interval ``[ts[0], ts[-1]]``.
        tol: Tolerances.
        include_end: Count a zero at the last sample (the half-open interval
            excludes it by default).
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size < 2 or np.any(np.diff(ts) <= 0):
        raise ContractViolation("nullity_sum needs increasing samples")

    def wronskian(t: float) -> CArray:
        f1, f2 = path(t)
        q1, q2 = orthonormalize(f1), orthonormalize(f2)
        return q1.conj().T @ symplectic_j(q1.shape[1]) @ q2

    samples = [wronskian(t) for t in ts]
    is_real = all(np.abs(s.imag).max() <= 1e-12 * max(1.0, np.abs(s).max()) for s in samples)
    found: list[float] = []
    if is_real:
        dets = np.array([np.linalg.det(s.real) for s in samples])
        for i in range(ts.size - 1):
            if dets[i] == 0.0:
                found.append(float(ts[i]))
            elif dets[i] * dets[i + 1] < 0:
                root = scipy.optimize.brentq(lambda t: np.linalg.det(wronskian(t).real), ts[i], ts[i + 1], xtol=1e-12)
                found.append(float(root))
        if dets[-1] == 0.0:
            found.append(float(ts[-1]))
    else:
        smin = np.array([np.linalg.svd(s, compute_uv=False)[-1] for s in samples])
        for i in range(1, ts.size - 1):
            if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1]:
                res = scipy.optimize.minimize_scalar(
                    lambda t: np.linalg.svd(wronskian(t), compute_uv=False)[-1],
                    bounds=(ts[i - 1], ts[i + 1]),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                if res.fun < tol.kernel:
                    found.append(float(res.x))
        for i in (0, ts.size - 1):
            if smin[i] < tol.kernel:
                found.append(float(ts[i]))
    locs = []
    for t in sorted(set(found)):
        if t >= ts[-1] and not include_end:
            continue
        mult = max(1, kernel_dim(wronskian(t), math.sqrt(tol.kernel), scale=1.0))
        locs.append((t, mult))
    return NullityResult(sum(m for _, m in locs), tuple(locs))


@dataclass(frozen=True)
class BoxReport:
    """Spectral flow around a closed contour made of shelves.

    Attributes:
        shelves: Per-shelf results in their natural orientation (increasing
            parameter), keyed by shelf name.
        orientation: ``+1`` or ``-1`` per shelf: the sign with which the shelf
            enters the closed loop.
        total: Loop total ``Σ orientation · index`` (zero by homotopy invariance).
    """

    shelves: dict
    orientation: dict
    total: int

    def index(self, name: str) -> int:
        return self.shelves[name].index


def maslov_box(shelves: dict, orientation: dict) -> BoxReport:
    """Assemble per-shelf flows into a closed-loop report.

    Args:
        shelves: Name to ``MaslovResult`` in natural orientation.
        orientation: Name to ``+1``/``-1``, the traversal sign around the loop.
    """
    if set(shelves) != set(orientation):
        raise ContractViolation("every shelf needs an orientation")
    total = sum(orientation[k] * shelves[k].index for k in shelves)
    return BoxReport(dict(shelves), dict(orientation), int(total))
