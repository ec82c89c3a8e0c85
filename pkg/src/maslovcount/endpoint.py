"""Endpoint diagnostics from the eigen-curves of two Hermitian matrices.

For non-real λ the matrix ``A(x; λ) = Φ* (J/i) Φ / (2 Im λ)`` has ``n``
negative and ``n`` positive eigenvalues, all nondecreasing in ``x``. The number
``m`` of eigenvalues with a finite limit at an endpoint is the number of
linearly independent solutions that are square integrable there, and the
limiting eigenvectors generate those solutions. For real λ the same role is
played by ``B(x; λ) = ∫_c^x Φ* B1 Φ``.

Both matrices become extremely ill-conditioned toward a singular endpoint,
where the interesting eigenvalues are the small ones. They are therefore never
read off a direct eigen-decomposition:

* For ``A``, the exact identity
  ``A(λ)^{-1} = -(2 Im λ)² (J/i) A(conj λ) (J/i)`` turns the large eigenpairs at
  ``conj λ`` into the small ones at λ.
* For ``B``, the small eigenvalues belong to solutions that decay toward the
  endpoint. Those solutions are integrated back from the deepest probe toward
  ``c`` (the stable direction), their Gram matrices are accumulated along the
  way, and a Rayleigh–Ritz step in their span replaces the unreliable direct
  values.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractViolation, FrameConstruction, IndeterminateLimit, NumericalInconsistency, TrackingAmbiguity
from .numerics import CArray, hermitian_eig, normalize_phase, orthonormalize, symplectic_j
from .propagate import _check_abscissae, _rhs, _solve, fundamental_matrix
from .system import HamiltonianSystem

KINDS = ("A", "B")
CASES = ("limit-point", "limit-circle", "limit-m")


@dataclass(frozen=True)
class ProbePlan:
    """Abscissae marching from the anchor toward an endpoint.

    Attributes:
        endpoint: ``"a"`` or ``"b"``.
        xs: Probe abscissae ordered from the anchor toward the endpoint; the
            anchor itself is not included.
    """

    endpoint: str
    xs: NDArray[np.float64]

    @classmethod
    def toward(cls, sys: HamiltonianSystem, endpoint: str, depth: float, count: int = 40) -> "ProbePlan":
        """Build a plan ending at ``depth``.

        Toward an infinite endpoint the probes are evenly spaced. Toward a
        finite endpoint they are geometrically graded, so that the distance to
        the endpoint shrinks by a constant factor each step.

        Args:
            sys: The system.
            endpoint: ``"a"`` or ``"b"``.
            depth: Deepest abscissa, strictly between the anchor and the endpoint.
            count: Number of probes (at least 3).
        """
        end = sys.endpoint_value(endpoint)
        c = sys.anchor
        if count < 3:
            raise ContractViolation("a probe plan needs at least 3 abscissae")
        sign = 1.0 if endpoint == "b" else -1.0
        if not sign * (depth - c) > 0 or not sign * (end - depth) > 0:
            raise ContractViolation(f"probe depth {depth} must lie strictly between {c} and {end}")
        if math.isfinite(end):
            offsets = np.geomspace(abs(end - c), abs(end - depth), count + 1)[1:]
            xs = end - sign * offsets
        else:
            xs = np.linspace(c, depth, count + 1)[1:]
        return cls(endpoint, np.asarray(xs, dtype=float))


@dataclass(frozen=True)
class NiessenCurve:
    """Eigenvalue and eigenvector tracks of ``A(x; λ)`` or ``B(x; λ)``.

    Attributes:
        kind: ``"A"`` (non-real λ) or ``"B"`` (real λ).
        lam: Spectral parameter.
        endpoint: Endpoint the probes march toward.
        xs: Abscissae starting at the anchor, ordered toward the endpoint.
        values: ``(K, 2n)`` eigenvalue tracks; column ``j`` is track ``j``.
        vectors: ``(K, 2n, 2n)`` unit eigenvectors; ``vectors[k][:, j]``
            belongs to ``values[k, j]``.
        raw_values: ``(K, 2n)`` eigenvalues of the directly formed matrix,
            sorted ascending. They are kept as diagnostics only.
        refined: ``(K, 2n)`` flags marking values that were not read off the
            direct decomposition.
        scale: Reference magnitude for the classification thresholds.
        n: Block dimension.
    """

    kind: str
    lam: complex
    endpoint: str
    xs: NDArray[np.float64]
    values: NDArray[np.float64]
    vectors: CArray
    raw_values: NDArray[np.float64]
    refined: NDArray[np.bool_]
    scale: float
    n: int

    def value_at(self, x: float) -> NDArray[np.float64]:
        """Track values at the sampled abscissa nearest to ``x``."""
        return self.values[int(np.argmin(np.abs(self.xs - x)))]

    def vectors_at(self, x: float) -> CArray:
        """Track vectors at the sampled abscissa nearest to ``x``."""
        return self.vectors[int(np.argmin(np.abs(self.xs - x)))]

    def monotonicity_defect(self) -> float:
        """Largest decrease of any track between consecutive samples, over scale.

        Tracks are nondecreasing in ``x``. Toward ``a`` the abscissae decrease,
        so there the tracks must be nonincreasing along the samples.
        """
        d = np.diff(self.values, axis=0)
        if self.endpoint == "a":
            d = -d
        if d.size == 0:
            return 0.0
        mags = np.maximum(np.abs(self.values[1:]), np.abs(self.values[:-1]))
        worst = np.maximum(-d, 0.0) / np.maximum(mags, self.scale)
        return float(worst.max())

    def to_csv(self, path: str) -> None:
        """Write rows ``x, track_index, eigenvalue, re/im vector components``."""
        dim = 2 * self.n
        header = ["x", "track_index", "eigenvalue"]
        for i in range(dim):
            header += [f"re_v{i}", f"im_v{i}"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, x in enumerate(self.xs):
                for j in range(dim):
                    v = self.vectors[k][:, j]
                    row = [repr(float(x)), j, repr(float(self.values[k, j]))]
                    for comp in v:
                        row += [repr(float(comp.real)), repr(float(comp.imag))]
                    w.writerow(row)


@dataclass(frozen=True)
class EndpointClassification:
    """Verdict on the square-integrable solutions at one endpoint.

    Attributes:
        endpoint: ``"a"`` or ``"b"``.
        kind: Curve kind the verdict came from.
        lam: Spectral parameter.
        n: Block dimension.
        m: Number of tracks with a finite limit.
        case: ``"limit-point"``, ``"limit-circle"`` or ``"limit-m"``.
        finite: Per-track flags, ``True`` for a finite limit.
        limits: Value of every track at the deepest probe.
        vectors: ``2n × 2n`` unit limiting vectors (phase normalized so that
            the largest entry is real positive).
        stabilized: Per-track flags, ``True`` when the angle between the last
            two probe vectors is below the stabilization tolerance.
        divergence: Last sampled magnitudes of the divergent tracks.
        x_final: Deepest probe abscissa.
        scale: Reference magnitude used for the thresholds.
        plateau: Relative-variation threshold that was applied.
        divergence_factor: Magnitude threshold factor that was applied.
    """

    endpoint: str
    kind: str
    lam: complex
    n: int
    m: int
    case: str
    finite: tuple[bool, ...]
    limits: NDArray[np.float64]
    vectors: CArray
    stabilized: tuple[bool, ...]
    divergence: dict
    x_final: float
    scale: float
    plateau: float
    divergence_factor: float

    @property
    def r(self) -> int:
        """``m - n``, the number of paired directions (meaningful for kind A)."""
        return self.m - self.n

    @property
    def finite_indices(self) -> list[int]:
        return [j for j, f in enumerate(self.finite) if f]

    @property
    def finite_limits(self) -> NDArray[np.float64]:
        return self.limits[self.finite_indices]

    @property
    def finite_vectors(self) -> CArray:
        return self.vectors[:, self.finite_indices]


@dataclass(frozen=True)
class NiessenBasis:
    """Coefficients of the boundary frame ``U(x; λ0) = Φ(x; λ0) R``.

    Attributes:
        lambda0: Non-real spectral parameter.
        endpoint: ``"a"`` or ``"b"``.
        R: ``2n × n`` coefficient matrix.
        pairs: Index pairs ``(j, n + j)`` of the tracks combined in each column.
        beta: Circle parameters of the paired columns.
        beta_requested: User requests before projection onto the circles.
        gamma: Parameters of the complements (``-β`` by default).
        complements: ``2n × r`` coefficients of the complements.
        kappa: Pairing constants of the combined columns with their complements.
        classification: The classification the basis was built from.
    """

    lambda0: complex
    endpoint: str
    R: CArray
    pairs: tuple[tuple[int, int], ...]
    beta: tuple[complex, ...]
    beta_requested: tuple[complex | None, ...]
    gamma: tuple[complex, ...]
    complements: CArray
    kappa: tuple[complex, ...]
    classification: EndpointClassification

    @property
    def r(self) -> int:
        return len(self.beta)


# ----------------------------------------------------------------------------
# Curves
# ----------------------------------------------------------------------------


def _match(prev_vals, prev_vecs, vals, vecs, tol: Tolerances, groups) -> tuple[NDArray, CArray]:
    """Permute ``(vals, vecs)`` so that track ``j`` continues track ``j`` of the previous sample.

    Matching maximizes eigenvector overlaps within each index group. A track
    whose previous eigenvalue was isolated must keep an overlap above the
    configured minimum; clusters of nearly equal eigenvalues are exempt, since
    their individual eigenvectors are not determined.
    """
    out_vals = np.empty_like(vals)
    out_vecs = np.empty_like(vecs)
    spread = max(np.abs(prev_vals).max(), 1e-300)
    for grp in groups:
        grp = np.asarray(grp)
        overlap = np.abs(prev_vecs[:, grp].conj().T @ vecs[:, grp])
        rows, cols = linear_sum_assignment(-overlap)
        for i, jj in zip(rows, cols):
            src, dst = grp[jj], grp[i]
            others = np.delete(prev_vals[grp], i)
            isolated = others.size == 0 or np.min(np.abs(others - prev_vals[dst])) > 1e-6 * spread
            if isolated and overlap[i, jj] < tol.overlap_min:
                raise TrackingAmbiguity(
                    "eigenvector overlap between consecutive probes is too small; use a finer probe plan",
                    overlap=float(overlap[i, jj]),
                    track=int(dst),
                )
            v = vecs[:, src]
            ph = np.vdot(v, prev_vecs[:, dst])
            if abs(ph) > 0:
                v = v * (ph / abs(ph))
            out_vals[dst] = vals[src]
            out_vecs[:, dst] = v
    return out_vals, out_vecs


def _phi_pair(sys: HamiltonianSystem, lam: complex, xs: NDArray, tol: Tolerances) -> tuple[CArray, CArray]:
    traj = fundamental_matrix(sys, lam, xs, tol)
    if sys.real_coefficients:
        return traj.values, np.conj(traj.values)
    bar = fundamental_matrix(sys, np.conj(lam), xs, tol)
    return traj.values, bar.values


def _kind_a_samples(sys: HamiltonianSystem, lam: complex, endpoint: str, xs: NDArray, tol: Tolerances):
    n = sys.n
    jn = symplectic_j(n) / 1j
    im2 = 2.0 * lam.imag
    order = np.argsort(xs)
    phis, phibars = _phi_pair(sys, lam, xs[order], tol)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    values, vectors, raw = [], [], []
    for k in range(xs.size):
        p, pb = phis[inv[k]], phibars[inv[k]]
        mu, v = hermitian_eig(p.conj().T @ jn @ p / im2, tol.hermitian)
        mub, vb = hermitian_eig(pb.conj().T @ jn @ pb / (-im2), tol.hermitian)
        raw.append(mu)
        vals = mu.copy()
        vecs = v.copy()
        if endpoint == "b":
            # Negative tracks stay bounded and are small; derive them from the
            # large positive pairs at conj λ.
            for j in range(n):
                vals[j] = -1.0 / (im2**2 * mub[n + j])
                vecs[:, j] = jn @ vb[:, n + j]
        else:
            for j in range(n):
                vals[n + j] = -1.0 / (im2**2 * mub[j])
                vecs[:, n + j] = jn @ vb[:, j]
        srt = np.argsort(vals)
        values.append(vals[srt])
        vectors.append(vecs[:, srt])
    return np.array(values), np.array(vectors), np.array(raw)


def _backward_gram(
    sys: HamiltonianSystem, lam: float, start: float, y_start: CArray, probes: NDArray, tol: Tolerances
) -> tuple[list[CArray], CArray]:
    """Gram matrices of decaying solutions on ``[c, x_p]``, in the anchor basis.

    The columns of ``y_start`` are initial values at ``start`` (the deepest
    probe). They are integrated toward the anchor with QR restarts. Restart
    factors are accumulated so that every segment can be expressed in the basis
    ``C = Y(c)`` of the final segment.

    Returns:
        A list of ``k × k`` matrices ``∫ (Φ C)* B1 (Φ C)`` over the interval
        between the anchor and each probe, and the coefficients ``C``.
    """
    c = sys.anchor
    dim, k = y_start.shape
    f = _rhs(sys, lam, dim, k, True)
    limit = math.log(tol.growth_restart)

    def grow(x, s):
        return math.log(max(np.abs(s[: dim * k]).max(), 1e-300)) - limit

    grow.terminal = True
    grow.direction = 1
    segs = []
    y = orthonormalize(y_start)
    x0 = start
    while True:
        state = np.concatenate([y.ravel(), np.zeros(k * k, dtype=complex)])
        sol = _solve(f, x0, c, state, tol, dense=True, events=grow)
        stop = float(sol.t[-1])
        end_state = sol.y[:, -1]
        segs.append((x0, stop, sol.sol))
        if sol.status != 1 or stop == c:
            break
        q, r = np.linalg.qr(end_state[: dim * k].reshape(dim, k))
        segs[-1] = (x0, stop, sol.sol, r)
        y = q
        x0 = stop
    # T_j maps final-segment coordinates onto segment j: Y_j = Y_L T_j.
    tmats = [np.eye(k, dtype=complex)] * len(segs)
    for j in range(len(segs) - 2, -1, -1):
        tmats[j] = tmats[j + 1] @ segs[j][3]
    tinv = [np.linalg.inv(t) for t in tmats]
    coeffs = segs[-1][2](c)[: dim * k].reshape(dim, k)

    def qacc(j, x):
        return segs[j][2](x)[dim * k :].reshape(k, k)

    grams = []
    for xp in probes:
        total = np.zeros((k, k), dtype=complex)
        for j, seg in enumerate(segs):
            s0, s1 = seg[0], seg[1]
            lo, hi = min(s0, s1), max(s0, s1)
            lo, hi = max(lo, min(c, xp)), min(hi, max(c, xp))
            if hi <= lo:
                continue
            part = qacc(j, hi) - qacc(j, lo)
            total += tinv[j].conj().T @ part @ tinv[j]
        grams.append(0.5 * (total + total.conj().T))
    return grams, coeffs


def _kind_b_samples(sys: HamiltonianSystem, lam: float, endpoint: str, xs: NDArray, tol: Tolerances):
    order = np.argsort(xs)
    traj = fundamental_matrix(sys, lam, xs[order], tol, quadrature=True)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    phis = traj.values[inv]
    quads = traj.quadrature[inv]
    raw_vals, raw_vecs = [], []
    for qm in quads:
        nu, w = np.linalg.eigh(qm)
        raw_vals.append(nu)
        raw_vecs.append(w)
    raw_vals = np.array(raw_vals)
    values = raw_vals.copy()
    vectors = np.array(raw_vecs)
    refined = np.zeros_like(values, dtype=bool)
    big = np.abs(raw_vals).max(axis=1)
    small = np.abs(raw_vals) < tol.refine_ratio * big[:, None]
    kdeep = int(small[-1].sum())
    if kdeep == 0:
        return values, vectors, raw_vals, refined
    deep_idx = np.flatnonzero(small[-1])
    y_start = phis[-1] @ vectors[-1][:, deep_idx]
    probes = [p for p in range(xs.size) if small[p].sum() == kdeep]
    grams, coeffs = _backward_gram(sys, lam, float(xs[-1]), y_start, xs[probes], tol)
    sign = 1.0 if endpoint == "b" else -1.0
    g = coeffs.conj().T @ coeffs
    for p, gram in zip(probes, grams):
        theta, z = scipy.linalg.eigh(gram, 0.5 * (g + g.conj().T))
        ritz = coeffs @ z
        ritz = ritz / np.linalg.norm(ritz, axis=0)
        idx = np.flatnonzero(small[p])
        vals = values[p].copy()
        vecs = vectors[p].copy()
        flags = np.zeros(vals.size, dtype=bool)
        vals[idx] = sign * theta
        vecs[:, idx] = ritz
        flags[idx] = True
        srt = np.argsort(vals)
        values[p] = vals[srt]
        vectors[p] = vecs[:, srt]
        refined[p] = flags[srt]
    return values, vectors, raw_vals, refined


def niessen_curve(
    sys: HamiltonianSystem,
    kind: str,
    lam: complex,
    plan: ProbePlan,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> NiessenCurve:
    """Eigen-curves of ``A(x; λ)`` (kind A) or ``B(x; λ)`` (kind B) along a probe plan.

    Args:
        sys: The system.
        kind: ``"A"`` (requires non-real λ) or ``"B"`` (requires real λ).
        lam: Spectral parameter.
        plan: Probes marching from the anchor toward the endpoint.
        tol: Tolerances.

    Returns:
        The curve, starting with the sample at the anchor.

    Raises:
        TrackingAmbiguity: when consecutive probes cannot be matched.
    """
    if kind not in KINDS:
        raise ContractViolation(f"kind must be one of {KINDS}, got {kind!r}")
    lam = complex(lam)
    if kind == "A" and lam.imag == 0:
        raise ContractViolation("kind A requires a non-real spectral parameter")
    if kind == "B" and lam.imag != 0:
        raise ContractViolation("kind B requires a real spectral parameter")
    xs = np.asarray(plan.xs, dtype=float)
    sign = 1.0 if plan.endpoint == "b" else -1.0
    if xs.size < 3 or np.any(sign * np.diff(xs) <= 0) or sign * (xs[0] - sys.anchor) <= 0:
        raise ContractViolation("probe abscissae must march strictly from the anchor toward the endpoint")
    _check_abscissae(sys, xs, tol)
    n = sys.n
    dim = 2 * n
    if kind == "A":
        values, vectors, raw = _kind_a_samples(sys, lam, plan.endpoint, xs, tol)
        refined = np.zeros_like(values, dtype=bool)
        if plan.endpoint == "b":
            refined[:, :n] = True
        else:
            refined[:, n:] = True
        s0 = 1.0 / (2.0 * abs(lam.imag))
        start_vals = np.concatenate([-s0 * np.ones(n), s0 * np.ones(n)])
        # At the anchor the ±s0 eigenspaces are spanned by (e ± i Je)/√2.
        jn = symplectic_j(n) / 1j
        basis = np.eye(dim, dtype=complex)[:, :n]
        neg = (basis - jn @ basis) / math.sqrt(2.0)
        pos = (basis + jn @ basis) / math.sqrt(2.0)
        start_vecs = np.hstack([neg, pos])
        groups = [range(n), range(n, dim)]
        scale = s0
    else:
        values, vectors, raw, refined = _kind_b_samples(sys, lam.real, plan.endpoint, xs, tol)
        start_vals = np.zeros(dim)
        start_vecs = np.eye(dim, dtype=complex)
        groups = [range(dim)]
        scale = float(max(np.abs(values[0]).max(), np.finfo(float).tiny))
    track_vals = [start_vals]
    track_vecs = [start_vecs]
    prev_vals, prev_vecs = values[0], vectors[0]
    track_vals.append(prev_vals)
    track_vecs.append(prev_vecs)
    for k in range(1, xs.size):
        prev_vals, prev_vecs = _match(prev_vals, prev_vecs, values[k], vectors[k], tol, groups)
        track_vals.append(prev_vals)
        track_vecs.append(prev_vecs)
    all_xs = np.concatenate([[sys.anchor], xs])
    raw_all = np.vstack([start_vals, raw])
    refined_all = np.vstack([np.zeros(dim, dtype=bool), refined])
    return NiessenCurve(
        kind=kind,
        lam=lam if kind == "A" else complex(lam.real),
        endpoint=plan.endpoint,
        xs=all_xs,
        values=np.array(track_vals),
        vectors=np.array(track_vecs),
        raw_values=raw_all,
        refined=refined_all,
        scale=scale,
        n=n,
    )


# ----------------------------------------------------------------------------
# Classification
# ----------------------------------------------------------------------------


def classify_endpoint(
    curve: NiessenCurve, tol: Tolerances = DEFAULT_TOLERANCES, window: int = 3
) -> EndpointClassification:
    """Decide which tracks of a curve approach a finite limit.

    A track is finite when its relative variation over the last ``window``
    probes is below ``tol.plateau`` and its magnitude is below
    ``tol.divergence_factor`` times the curve scale. It is divergent when its
    magnitude exceeds that threshold.

    Raises:
        IndeterminateLimit: when a track is neither; per-track variations and
            magnitudes are attached.
        NumericalInconsistency: when a kind-A verdict has fewer than ``n``
            finite tracks.
    """
    if window < 3 or curve.xs.size - 1 < window:
        raise ContractViolation("classification needs at least 3 probe abscissae")
    n = curve.n
    tail = curve.values[-window:]
    last = tail[-1]
    threshold = tol.divergence_factor * curve.scale
    variation = np.ptp(tail, axis=0) / np.maximum(np.abs(last), curve.scale)
    finite = (variation < tol.plateau) & (np.abs(last) < threshold)
    divergent = np.abs(last) >= threshold
    undecided = ~(finite | divergent)
    if np.any(undecided):
        raise IndeterminateLimit(
            "eigen-track neither plateaued nor diverged; probe deeper or adjust thresholds",
            tracks=[int(j) for j in np.flatnonzero(undecided)],
            variation=[float(v) for v in variation],
            magnitude=[float(v) for v in np.abs(last)],
            threshold=float(threshold),
        )
    m = int(finite.sum())
    if curve.kind == "A" and not n <= m <= 2 * n:
        raise NumericalInconsistency(f"kind-A classification found m = {m} finite tracks, outside [{n}, {2 * n}]", m=m)
    case = "limit-point" if m == n else "limit-circle" if m == 2 * n else "limit-m"
    vecs = curve.vectors[-1]
    prev = curve.vectors[-2]
    stabilized = []
    for j in range(2 * n):
        cosang = min(1.0, abs(np.vdot(prev[:, j], vecs[:, j])))
        stabilized.append(bool(math.acos(cosang) < tol.stabilization_angle))
    normalized = np.column_stack([normalize_phase(vecs[:, j]) for j in range(2 * n)])
    return EndpointClassification(
        endpoint=curve.endpoint,
        kind=curve.kind,
        lam=curve.lam,
        n=n,
        m=m,
        case=case,
        finite=tuple(bool(f) for f in finite),
        limits=last.copy(),
        vectors=normalized,
        stabilized=tuple(stabilized),
        divergence={int(j): float(abs(last[j])) for j in np.flatnonzero(divergent)},
        x_final=float(curve.xs[-1]),
        scale=float(curve.scale),
        plateau=tol.plateau,
        divergence_factor=tol.divergence_factor,
    )


def conjugate_classification(cls: EndpointClassification) -> EndpointClassification:
    """The kind-A classification at ``conj λ`` implied by the pairing identity.

    Limits map as ``μ_j(conj λ) = -1/((2 Im λ)² μ_{n+j mod 2n}(λ))`` and the
    limiting vectors as ``v_j(conj λ) = (J/i) v_{n+j mod 2n}(λ)``. These are
    the phase conventions under which the conjugate boundary frames are
    J-orthogonal.
    """
    if cls.kind != "A":
        raise ContractViolation("conjugate classification applies to kind A")
    n = cls.n
    jn = symplectic_j(n) / 1j
    im2 = 2.0 * cls.lam.imag
    perm = [(j + n) % (2 * n) for j in range(2 * n)]
    with np.errstate(divide="ignore"):
        limits = np.array([-1.0 / (im2**2 * cls.limits[p]) for p in perm])
    vectors = np.column_stack([jn @ cls.vectors[:, p] for p in perm])
    finite = tuple(cls.finite[p] for p in perm)
    stabilized = tuple(cls.stabilized[p] for p in perm)
    return EndpointClassification(
        endpoint=cls.endpoint,
        kind="A",
        lam=np.conj(cls.lam),
        n=n,
        m=cls.m,
        case=cls.case,
        finite=finite,
        limits=limits,
        vectors=vectors,
        stabilized=stabilized,
        divergence={},
        x_final=cls.x_final,
        scale=cls.scale,
        plateau=cls.plateau,
        divergence_factor=cls.divergence_factor,
    )


def conjugate_pairing_defect(curve: NiessenCurve, curve_bar: NiessenCurve) -> dict:
    """Check the eigenvalue pairing between ``A(x; λ)`` and ``A(x; conj λ)``.

    Both curves are compared through their direct eigen-decompositions. At
    each sample every small eigenvalue at one parameter is compared with the
    value implied by its large partner at the other parameter. Rounding in the
    direct small eigenvalue is of order ``ε ‖A‖``, so the defect is reported
    relative to ``max(1, ‖A‖)`` as well as in absolute terms.

    Returns:
        A dict with ``"absolute"``, ``"relative"`` and ``"alignment"`` (the
        largest ``1 - |⟨v_{n+j}(λ), (J/i) v_j(conj λ)⟩|`` over isolated
        eigenvalues).
    """
    if curve.kind != "A" or curve_bar.kind != "A":
        raise ContractViolation("pairing defect applies to kind-A curves")
    if curve.xs.shape != curve_bar.xs.shape or not np.allclose(curve.xs, curve_bar.xs):
        raise ContractViolation("curves must share abscissae")
    if not np.isclose(curve_bar.lam, np.conj(curve.lam)):
        raise ContractViolation("second curve must be at the conjugate parameter")
    return pairing_defect_from_matrices(curve.lam, _direct_a(curve), _direct_a(curve_bar))


def _direct_a(curve: NiessenCurve) -> list[tuple[NDArray, CArray]]:
    # Reassemble direct decompositions: tracks sorted ascending carry vectors.
    out = []
    for vals, vecs in zip(curve.values, curve.vectors):
        srt = np.argsort(vals)
        out.append((vals[srt], vecs[:, srt]))
    return out


def pairing_defect_from_matrices(lam: complex, pairs_lam, pairs_bar) -> dict:
    """Pairing defect from ascending eigen-decompositions at λ and ``conj λ``.

    Args:
        lam: The parameter of the first list.
        pairs_lam: Sequence of ``(values, vectors)`` at λ, ascending.
        pairs_bar: Same at ``conj λ``.
    """
    lam = complex(lam)
    im2 = 2.0 * lam.imag
    absolute = 0.0
    relative = 0.0
    alignment = 0.0
    for (mu, v), (mub, vb) in zip(pairs_lam, pairs_bar):
        dim = mu.size
        n = dim // 2
        jn = symplectic_j(n) / 1j
        for left, left_vec, right, right_vec in ((mub, vb, mu, v), (mu, v, mub, vb)):
            norm = max(1.0, float(np.abs(left).max()))
            for j in range(dim):
                p = (n + j) % dim
                if abs(right[p]) < abs(left[j]):
                    continue
                d = abs(left[j] + 1.0 / (im2**2 * right[p]))
                absolute = max(absolute, d)
                relative = max(relative, d / norm)
                others = np.delete(right, p)
                if np.min(np.abs(others - right[p])) > 1e-6 * np.abs(right).max():
                    overlap = abs(np.vdot(right_vec[:, p], jn @ left_vec[:, j]))
                    alignment = max(alignment, 1.0 - overlap)
    return {"absolute": absolute, "relative": relative, "alignment": alignment}


# ----------------------------------------------------------------------------
# Boundary frames
# ----------------------------------------------------------------------------


def _pairs(cls: EndpointClassification) -> list[tuple[int, int]]:
    n = cls.n
    return [(j, n + j) for j in range(n)]


def build_niessen_basis(
    cls: EndpointClassification,
    beta: Sequence[complex | None] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> NiessenBasis:
    """Boundary-frame coefficients from a kind-A classification.

    Columns pair tracks ``j`` and ``n + j``. When both have finite limits the
    column is ``v_j + β_j v_{n+j}`` with ``|β_j| = sqrt(-μ_j / μ_{n+j})``;
    otherwise it is the vector of the finite track.

    Args:
        cls: Kind-A classification at a non-real λ0.
        beta: Optional circle parameters for the paired columns, in pair order.
            ``None`` entries take the default positive real point. A requested
            value off the circle is scaled onto it when its modulus is within
            1% of the radius; the request is recorded.
        tol: Tolerances.

    Raises:
        NumericalInconsistency: when a ratio ``-μ_j / μ_{n+j}`` is not positive.
        ContractViolation: for a requested β far from its circle or with the
            wrong count.
    """
    if cls.kind != "A":
        raise ContractViolation("a Niessen basis is built from a kind-A classification")
    if cls.m < cls.n:
        raise ContractViolation("classification has fewer than n finite tracks")
    n = cls.n
    lam = complex(cls.lam)
    im2 = 2.0 * lam.imag
    columns, comps, betas, requests, gammas, kappas, used = [], [], [], [], [], [], []
    paired = [(j, k) for j, k in _pairs(cls) if cls.finite[j] and cls.finite[k]]
    if beta is not None and len(beta) != len(paired):
        raise ContractViolation(f"expected {len(paired)} beta values, got {len(beta)}")
    ip = 0
    for j, k in _pairs(cls):
        vj, vk = cls.vectors[:, j], cls.vectors[:, k]
        if cls.finite[j] and cls.finite[k]:
            ratio = -cls.limits[j] / cls.limits[k]
            if not ratio > tol.kernel:
                raise NumericalInconsistency(
                    "inconsistent classification: paired limits do not have opposite signs",
                    mu_j=float(cls.limits[j]),
                    mu_nj=float(cls.limits[k]),
                )
            rho = math.sqrt(ratio)
            req = None if beta is None else beta[ip]
            ip += 1
            if req is None:
                b = complex(rho)
            else:
                req = complex(req)
                if abs(req) == 0 or abs(abs(req) - rho) > 1e-2 * rho:
                    raise ContractViolation(f"beta {req} is not on the circle of radius {rho:.6g}")
                b = req * (rho / abs(req))
            g = -b
            columns.append(vj + b * vk)
            comps.append(vj + g * vk)
            betas.append(b)
            requests.append(req)
            gammas.append(g)
            kappas.append(1j * im2 * (cls.limits[j] + g * b * cls.limits[k]))
            used.append((j, k))
        elif cls.finite[j]:
            columns.append(vj)
            used.append((j, j))
        elif cls.finite[k]:
            columns.append(vk)
            used.append((k, k))
        else:
            raise NumericalInconsistency("neither track of a pair has a finite limit", pair=(j, k))
    R = np.column_stack(columns)
    if np.linalg.matrix_rank(R, tol=1e-8 * np.linalg.norm(R)) < n:
        raise NumericalInconsistency("boundary-frame coefficients are rank deficient")
    comp = np.column_stack(comps) if comps else np.zeros((2 * n, 0), dtype=complex)
    return NiessenBasis(
        lambda0=lam,
        endpoint=cls.endpoint,
        R=R,
        pairs=tuple(used),
        beta=tuple(betas),
        beta_requested=tuple(requests),
        gamma=tuple(gammas),
        complements=comp,
        kappa=tuple(kappas),
        classification=cls,
    )


def conjugate_basis(basis: NiessenBasis) -> NiessenBasis:
    """The basis at ``conj λ0`` with ``β(conj λ0) = -conj β(λ0)``."""
    cls_bar = conjugate_classification(basis.classification)
    return build_niessen_basis(cls_bar, [-np.conj(b) for b in basis.beta])


def niessen_orthogonality(basis: NiessenBasis) -> float:
    """``‖R(conj λ0)* J R(λ0)‖`` for the conjugate basis of ``basis``."""
    bar = conjugate_basis(basis)
    j = symplectic_j(basis.classification.n)
    return float(np.linalg.norm(bar.R.conj().T @ j @ basis.R, 2))


def boundary_lagrangian_defect(sys: HamiltonianSystem, basis: NiessenBasis, x: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``‖U* J U‖ / ‖U‖²`` for ``U = Φ(x; λ0) R``; small near the endpoint."""
    phi = fundamental_matrix(sys, basis.lambda0, [x], tol).values[0]
    u = phi @ basis.R
    j = symplectic_j(sys.n)
    return float(np.linalg.norm(u.conj().T @ j @ u, 2) / np.linalg.norm(u, 2) ** 2)


@dataclass(frozen=True)
class SingularFrame:
    """Coefficients ``W`` of a frame ``X(x; λ) = Φ(x; λ) W`` at a singular endpoint.

    Attributes:
        W: ``2n × n`` coefficients with orthonormal columns.
        lam: Real spectral parameter.
        endpoint: ``"a"`` or ``"b"``.
        candidates: Finite-limit vectors the columns are combined from.
        combination: ``m × n`` coefficients of ``W`` in the candidates (before
            normalization; for one column it is scaled to a leading 1).
        limits: Values of ``U(x; λ0)* J Φ(x; λ) w`` at the deepest probe, one
            row per column of ``U`` and one column per candidate.
        residual: Relative size of ``limits @ combination``.
        x_eval: Abscissa where the limits were approximated.
    """

    W: CArray
    lam: float
    endpoint: str
    candidates: CArray
    combination: CArray
    limits: CArray
    residual: float
    x_eval: float
    extra: dict = field(default_factory=dict)


def _real_span(w: CArray) -> CArray:
    """Orthonormal real basis of the real subspace closest to ``span(W)``.

    With real coefficients and real λ the Lagrangian plane of a boundary
    condition is invariant under conjugation, so it has a real basis. The
    computed ``W`` carries small imaginary noise from the complex parameter
    used to select it; near a singular endpoint ``Φ`` amplifies that noise
    into a visible Lagrangian defect, so it is removed here.
    """
    n = w.shape[1]
    u, _, _ = np.linalg.svd(np.hstack([w.real, w.imag]))
    return u[:, :n].astype(complex)


def _normalized_columns(w: CArray) -> CArray:
    # A single column gets the deterministic phase; wider frames only need an
    # orthonormal basis of their span.
    if w.shape[1] == 1:
        return normalize_phase(w[:, 0]).reshape(-1, 1)
    return orthonormalize(w)


def singular_frame(
    sys: HamiltonianSystem,
    basis: NiessenBasis | None,
    curve_b: NiessenCurve,
    tol: Tolerances = DEFAULT_TOLERANCES,
    cls_b: EndpointClassification | None = None,
) -> SingularFrame:
    """Frame coefficients at a singular endpoint for a real λ.

    The candidate directions are the finite-limit vectors of the kind-B curve.
    With exactly ``n`` candidates they are the frame. Otherwise the frame is
    the combination of candidates annihilating ``U(x; λ0)* J Φ(x; λ) w`` at the
    deepest probe, which picks the solutions satisfying the boundary condition
    encoded by ``U``.

    Args:
        sys: The system.
        basis: Boundary-frame coefficients at λ0 (needed unless exactly ``n``
            candidates are finite).
        curve_b: Kind-B curve toward the endpoint at the real λ.
        tol: Tolerances.
        cls_b: Classification of ``curve_b``, computed when omitted.

    Raises:
        FrameConstruction: when fewer than ``n`` candidates exist, or the
            annihilation residual exceeds ``tol.kernel``.
    """
    if curve_b.kind != "B":
        raise ContractViolation("singular frames are built from a kind-B curve")
    cls_b = cls_b or classify_endpoint(curve_b, tol)
    n = sys.n
    cand = cls_b.finite_vectors
    lam = float(curve_b.lam.real)
    xk = float(curve_b.xs[-1])
    if cand.shape[1] < n:
        raise FrameConstruction("fewer than n finite-limit directions", candidates=int(cand.shape[1]))
    if cand.shape[1] == n:
        return SingularFrame(
            W=_normalized_columns(cand),
            lam=lam,
            endpoint=curve_b.endpoint,
            candidates=cand,
            combination=np.eye(n, dtype=complex),
            limits=np.zeros((n, n), dtype=complex),
            residual=0.0,
            x_eval=xk,
        )
    if basis is None:
        raise ContractViolation("a Niessen basis is needed to select among the candidate directions")
    if basis.endpoint != curve_b.endpoint:
        raise ContractViolation("basis and curve refer to different endpoints")
    phi0 = fundamental_matrix(sys, basis.lambda0, [xk], tol).values[0]
    phil = fundamental_matrix(sys, lam, [xk], tol).values[0]
    j = symplectic_j(n)
    u = phi0 @ basis.R
    limits = u.conj().T @ j @ phil @ cand
    _, sv, vh = np.linalg.svd(limits)
    comb = vh.conj().T[:, -n:]
    scale = max(float(np.linalg.norm(limits, 2)), np.finfo(float).tiny)
    residual = float(np.linalg.norm(limits @ comb, 2) / scale)
    if residual > tol.kernel:
        raise FrameConstruction("annihilation system has no n-dimensional kernel", residual=residual)
    if n == 1 and abs(comb[0, 0]) > 0:
        comb = comb / comb[0, 0]
    w = cand @ comb
    if sys.real_coefficients:
        w = _real_span(w)
    return SingularFrame(
        W=_normalized_columns(w),
        lam=lam,
        endpoint=curve_b.endpoint,
        candidates=cand,
        combination=comb,
        limits=limits,
        residual=residual,
        x_eval=xk,
    )


def beta_from_direction(
    sys: HamiltonianSystem, basis: NiessenBasis, lam: float, w: CArray, x: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> complex:
    """Circle parameter whose boundary condition admits the solution ``Φ(x; λ) w``.

    For ``n = 1`` with a paired column, solve
    ``(v1 + β v2)* Φ(x; λ0)* J Φ(x; λ) w = 0`` for ``β`` (the row is conjugated,
    so ``β`` enters conjugated): ``β = -conj(a/b)`` with
    ``a = v1* Φ0* J Φ w`` and ``b = v2* Φ0* J Φ w``.
    """
    if sys.n != 1 or basis.r != 1:
        raise ContractViolation("beta_from_direction supports n = 1 with one paired column")
    j, k = basis.pairs[0]
    cls = basis.classification
    phi0 = fundamental_matrix(sys, basis.lambda0, [x], tol).values[0]
    phil = fundamental_matrix(sys, lam, [x], tol).values[0]
    jm = symplectic_j(1)
    target = jm @ phil @ np.asarray(w, dtype=complex).ravel()
    a = np.vdot(phi0 @ cls.vectors[:, j], target)
    b = np.vdot(phi0 @ cls.vectors[:, k], target)
    return complex(-np.conj(a / b))


def bounded_direction(sys: HamiltonianSystem, lam: float, x: float, tol: Tolerances = DEFAULT_TOLERANCES) -> CArray:
    """Unit ``w`` minimizing ``|Φ(x; λ) w|``: the solution that stays bounded toward ``x``."""
    phi = fundamental_matrix(sys, lam, [x], tol).values[0]
    _, _, vh = np.linalg.svd(phi)
    return normalize_phase(vh.conj().T[:, -1])
