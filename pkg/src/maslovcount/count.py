"""Eigenvalue counts on ``[λ1, λ2)`` from the Maslov index of two boundary paths.

The left path is the Lagrangian plane of solutions satisfying the left
boundary condition at ``λ1``; the right path is the plane of solutions that
satisfy the right boundary condition at ``λ2``. The number of eigenvalues in
``[λ1, λ2)`` equals the index of that pair as ``x`` runs across the interval
(it is a lower bound when ``λ1`` or ``λ2`` is itself an eigenvalue).

Every frame is transported away from the endpoint that defines it. Solutions
singled out by a boundary condition at an endpoint are the ones that are hard
to integrate toward that endpoint, and they are attracting when integrated
away from it.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .endpoint import (
    EndpointClassification,
    NiessenBasis,
    ProbePlan,
    SingularFrame,
    build_niessen_basis,
    classify_endpoint,
    niessen_curve,
    singular_frame,
)
from .errors import ContractViolation
from .maslov import BoxReport, ConjugatePoint, MaslovResult, NullityResult, intersection_dim, maslov_box, nullity_sum, spectral_flow
from .numerics import subspace_angle, symplectic_j
from .propagate import FrameTrajectory, fundamental_matrix, transport_frame
from .system import BoundaryMatrixAlpha, HamiltonianSystem

LAMBDA_PHASE_STEP = 0.25 * math.pi


@dataclass(frozen=True)
class EigencountRequest:
    """Everything that determines a count.

    Attributes:
        sys: The system.
        lambda1: Lower end of the counting interval.
        lambda2: Upper end (excluded).
        alpha: Boundary matrix at a regular left endpoint.
        basis_a: Boundary-frame coefficients at a singular left endpoint.
        basis_b: Boundary-frame coefficients at a singular right endpoint
            (may be ``None`` at a limit-point endpoint).
        alpha_b: Boundary matrix at a regular right endpoint; the frame there
            is ``J α_b*``.
        x_min: Left end of the counting path (defaults to ``a`` when regular,
            otherwise to ``a`` plus the system's offset).
        x_max: Right end of the counting path.
        extension: Length beyond ``x_max`` from which the right frame is
            carried back (0 for a regular right endpoint at ``x_max``).
        probe_a: Deepest real-λ probe toward a singular ``a``.
        probe_b: Deepest real-λ probe toward a singular ``b``.
        probe_count: Number of probes in the real-λ curves.
        tol: Tolerances.
    """

    sys: HamiltonianSystem
    lambda1: float
    lambda2: float
    alpha: BoundaryMatrixAlpha | None = None
    basis_a: NiessenBasis | None = None
    basis_b: NiessenBasis | None = None
    alpha_b: BoundaryMatrixAlpha | None = None
    x_min: float | None = None
    x_max: float | None = None
    extension: float | None = None
    probe_a: float | None = None
    probe_b: float | None = None
    probe_count: int = 40
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self) -> None:
        s = self.sys
        if not self.lambda1 < self.lambda2:
            raise ContractViolation(f"need lambda1 < lambda2, got {self.lambda1}, {self.lambda2}")
        if s.kind_a == "regular" and self.alpha is None:
            raise ContractViolation("a regular left endpoint needs a boundary matrix alpha")
        if s.kind_a == "regular" and self.alpha.n != s.n:
            raise ContractViolation("alpha has the wrong size")
        if s.kind_b == "regular" and self.alpha_b is None:
            raise ContractViolation("a regular right endpoint needs a boundary matrix")
        lo, hi = self.path_range
        if not (s.a <= lo < hi <= s.b):
            raise ContractViolation(f"counting path [{lo}, {hi}] must lie inside [{s.a}, {s.b}]")
        if s.kind_a == "singular" and lo <= s.a:
            raise ContractViolation("the counting path must start inside a singular left endpoint")
        if s.kind_b == "singular" and hi >= s.b:
            raise ContractViolation("the counting path must end inside a singular right endpoint")

    @property
    def path_range(self) -> tuple[float, float]:
        s = self.sys
        lo = self.x_min
        if lo is None:
            lo = s.a if s.kind_a == "regular" else s.a + s.defaults.x_min_offset
        hi = self.x_max
        if hi is None:
            hi = s.b if s.kind_b == "regular" else s.defaults.x_max
        return float(lo), float(hi)

    @property
    def far_point(self) -> float:
        """Abscissa from which the right frame is carried back."""
        s = self.sys
        _, hi = self.path_range
        if s.kind_b == "regular":
            return s.b
        ext = self.extension
        if ext is None:
            ext = max(10.0, 0.5 * (hi - s.anchor))
        far = hi + ext
        if math.isfinite(s.b):
            far = min(far, hi + 0.5 * (s.b - hi))
        return float(far)


@dataclass(frozen=True)
class EigencountReport:
    """Result of a count.

    Attributes:
        count: The Maslov index of the counting path, which is ``N([λ1, λ2))``
            under the equality hypotheses and a lower bound otherwise.
        points: Conjugate points along the counting path.
        shelf: Full spectral-flow result of the counting path.
        nullity: Independent count of the Wronskian zeros on the same path.
        caveat: True when ``λ1`` or ``λ2`` was detected as an eigenvalue.
        caveat_detail: Which end triggered the caveat.
        frames: Coefficients of the singular frames used, by endpoint.
        classifications: Real-λ endpoint classifications used.
        box: Full contour report, when requested.
        gap_warning: Message when the interval leaves a known spectral gap.
        elapsed: Wall-clock seconds.
    """

    count: int
    points: tuple[ConjugatePoint, ...]
    shelf: MaslovResult
    nullity: NullityResult
    caveat: bool
    caveat_detail: str
    frames: dict = field(default_factory=dict)
    classifications: dict = field(default_factory=dict)
    box: BoxReport | None = None
    gap_warning: str = ""
    elapsed: float = 0.0

    def to_text(self) -> str:
        """Structured ``key: value`` summary."""
        lines = [
            f"count: {self.count}",
            f"conjugate_points: {', '.join(f'{p.t:.6g}' for p in self.points) or 'none'}",
            f"directions: {', '.join(str(p.direction) for p in self.points) or 'none'}",
            f"nullity_sum: {self.nullity.total}",
            f"lower_bound_only: {str(self.caveat).lower()}",
        ]
        if self.caveat_detail:
            lines.append(f"caveat: {self.caveat_detail}")
        if self.gap_warning:
            lines.append(f"warning: {self.gap_warning}")
        lines.append(f"unitarity_defect: {self.shelf.unitarity:.3e}")
        lines.append(f"samples: {self.shelf.ts.size}")
        for key, fr in self.frames.items():
            lines.append(f"frame_{key}: {' '.join(_fmt_complex(z) for z in np.asarray(fr.W).ravel())}")
        if self.box is not None:
            for name, res in self.box.shelves.items():
                lines.append(f"shelf_{name}: {res.index}")
            lines.append(f"loop_total: {self.box.total}")
        lines.append(f"elapsed_seconds: {self.elapsed:.2f}")
        return "\n".join(lines)


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


# ----------------------------------------------------------------------------
# Boundary data
# ----------------------------------------------------------------------------


def classify_at(
    sys: HamiltonianSystem,
    endpoint: str,
    lam: complex,
    depth: float | None = None,
    count: int = 40,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> EndpointClassification:
    """Classification from a curve of the matching kind (A for non-real λ, B for real λ)."""
    lam = complex(lam)
    kind = "B" if lam.imag == 0 else "A"
    if depth is None:
        depth = default_depth(sys, endpoint, kind)
    curve = niessen_curve(sys, kind, lam, ProbePlan.toward(sys, endpoint, depth, count), tol)
    return classify_endpoint(curve, tol)


def default_depth(sys: HamiltonianSystem, endpoint: str, kind: str) -> float:
    """Deepest probe from the system defaults."""
    d = sys.defaults
    if endpoint == "a":
        return sys.a + d.probe_a if math.isfinite(sys.a) else -d.probe_b_real
    return d.probe_b_complex if kind == "A" else d.probe_b_real


def niessen_basis_at(
    sys: HamiltonianSystem,
    endpoint: str,
    lambda0: complex | None = None,
    beta: Sequence[complex | None] | None = None,
    depth: float | None = None,
    count: int = 40,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> NiessenBasis:
    """Classify a singular endpoint at non-real λ0 and build its boundary frame."""
    lam0 = complex(sys.defaults.lambda0 if lambda0 is None else lambda0)
    if lam0.imag == 0:
        raise ContractViolation("lambda0 must be non-real")
    cls = classify_at(sys, endpoint, lam0, depth, count, tol)
    return build_niessen_basis(cls, beta, tol)


def _singular_coefficients(req: EigencountRequest, endpoint: str, lam: float) -> tuple[SingularFrame, EndpointClassification]:
    s = req.sys
    depth = req.probe_a if endpoint == "a" else req.probe_b
    if depth is None:
        depth = default_depth(s, endpoint, "B")
    curve = niessen_curve(s, "B", lam, ProbePlan.toward(s, endpoint, depth, req.probe_count), req.tol)
    cls = classify_endpoint(curve, req.tol)
    basis = req.basis_a if endpoint == "a" else req.basis_b
    return singular_frame(s, basis, curve, req.tol, cls), cls


class FrameFactory:
    """Builds and caches the left and right frames of a request at any real λ."""

    def __init__(self, req: EigencountRequest) -> None:
        self.req = req
        self._left: dict[float, FrameTrajectory] = {}
        self._right: dict[float, FrameTrajectory] = {}
        self._seeds: dict[float, np.ndarray] = {}
        self._right_at: dict[tuple[float, float], np.ndarray] = {}
        self.frames: dict[tuple[str, float], SingularFrame] = {}
        self.classifications: dict[tuple[str, float], EndpointClassification] = {}

    def _coeffs(self, endpoint: str, lam: float) -> SingularFrame:
        key = (endpoint, lam)
        if key not in self.frames:
            fr, cls = _singular_coefficients(self.req, endpoint, lam)
            self.frames[key] = fr
            self.classifications[key] = cls
        return self.frames[key]

    def left(self, lam: float) -> FrameTrajectory:
        """Left frame at λ, transported from its start to the far point."""
        lam = float(lam)
        if lam not in self._left:
            req, s = self.req, self.req.sys
            lo, hi = req.path_range
            if s.kind_a == "regular":
                start, f0 = s.a, req.alpha.frame()
            else:
                w = self._oriented("a", lam)
                start = lo
                f0 = fundamental_matrix(s, lam, [lo], req.tol).values[0] @ w
            self._left[lam] = transport_frame(s, lam, f0, start, hi, req.tol, label=f"left({lam})")
        return self._left[lam]

    def right(self, lam: float) -> FrameTrajectory:
        """Right frame at λ, carried back from the far point to the path start."""
        lam = float(lam)
        if lam not in self._right:
            req, s = self.req, self.req.sys
            lo, hi = req.path_range
            far = req.far_point
            if s.kind_b == "regular":
                f_far = req.alpha_b.frame()
            else:
                f_far = self._right_seed(lam, far)
            traj = transport_frame(s, lam, f_far, far, lo, req.tol, label=f"right({lam})")
            ref = float(req.lambda2)
            if lam != ref:
                # Decaying planes at x_max move little with λ, so orienting
                # against the reference frame there makes the orientation
                # continuous in λ.
                d = np.linalg.det(self.right(ref)(hi).conj().T @ traj(hi))
                if d.real < 0:
                    traj = traj.flipped()
            self._right[lam] = traj
        return self._right[lam]

    def right_at(self, lam: float, x: float) -> np.ndarray:
        """Right frame at λ evaluated at one abscissa ``x <= x_max``.

        Only the stretch from the far point down to ``x`` is integrated, which
        is what λ paths at fixed ``x`` need.
        """
        lam = float(lam)
        if lam in self._right or lam == float(self.req.lambda2):
            return self.right(lam)(x)
        key = (lam, float(x))
        if key not in self._right_at:
            req, s = self.req, self.req.sys
            _, hi = req.path_range
            if x > hi:
                raise ContractViolation(f"x = {x} lies beyond x_max = {hi}")
            far = req.far_point
            f_far = req.alpha_b.frame() if s.kind_b == "regular" else self._right_seed(lam, far)
            traj = transport_frame(s, lam, f_far, far, x, req.tol)
            if traj.hi >= hi and np.linalg.det(self.right(req.lambda2)(hi).conj().T @ traj(hi)).real < 0:
                traj = traj.flipped()
            self._right_at[key] = traj(x)
        return self._right_at[key]

    def _right_seed(self, lam: float, far: float) -> np.ndarray:
        # Carried forward, the frame Φ W aligns with the solutions that grow
        # toward b, which is the worst seed for the backward pass. Its
        # orthogonal complement J Φ W is Lagrangian too and has an O(1)
        # component along the decaying solutions, so it converges fastest.
        # Near an eigenvalue the forward frame at ``far`` sweeps through every
        # direction in a tiny λ window, so the seed is taken at the fixed
        # reference ``λ2``: the backward pass still converges to the decaying
        # plane at λ, and the frame orientation stays continuous in λ. When
        # more than n directions are square integrable there is no attracting
        # plane, and the frame Φ W(λ) itself is carried.
        s, req = self.req.sys, self.req
        n = s.n
        ref = float(req.lambda2)
        self._coeffs("b", ref)
        if self.classifications[("b", ref)].m > n:
            w = self._oriented("b", lam)
            return transport_frame(s, lam, w, s.anchor, far, req.tol)(far)
        if far not in self._seeds:
            w = self._oriented("b", ref)
            out = transport_frame(s, ref, w, s.anchor, far, req.tol)
            self._seeds[far] = symplectic_j(n) @ out(far)
        return self._seeds[far]

    def _oriented(self, endpoint: str, lam: float) -> np.ndarray:
        """Singular-frame coefficients at λ, oriented like those at ``λ1``.

        The sign of ``det(Wᵀ W_ref)`` is made positive so that frames built
        from them vary continuously in λ (the sign of a Wronskian determinant
        is then meaningful along λ paths).
        """
        w = np.array(self._coeffs(endpoint, lam).W)
        ref = self._coeffs(endpoint, float(self.req.lambda1)).W
        d = np.linalg.det(ref.conj().T @ w)
        if d.real < 0:
            w[:, 0] = -w[:, 0]
        return w

    def right_convergence(self, lam: float) -> float:
        """Angle at ``x_max`` between the right frame and one carried from twice as far."""
        req, s = self.req, self.req.sys
        if s.kind_b == "regular":
            return 0.0
        _, hi = req.path_range
        far = req.far_point
        far2 = hi + 2.0 * (far - hi)
        if math.isfinite(s.b):
            far2 = min(far2, hi + 0.75 * (s.b - hi))
        alt = transport_frame(s, lam, self._right_seed(lam, far2), far2, hi, req.tol)
        return subspace_angle(alt(hi), self.right(lam)(hi))

    def x_grid(self, *trajs: FrameTrajectory) -> np.ndarray:
        lo, hi = self.req.path_range
        pts = np.concatenate([t.breakpoints() for t in trajs] + [np.linspace(lo, hi, 65)])
        return np.unique(pts[(pts >= lo) & (pts <= hi)])


# ----------------------------------------------------------------------------
# Counting
# ----------------------------------------------------------------------------


def _x_shelf(fac: FrameFactory, lam_left: float, lam_right: float, label: str) -> MaslovResult:
    lo, hi = fac.req.path_range
    left = fac.left(lam_left)
    right = fac.right(lam_right)
    return spectral_flow(lambda x: (left(x), right(x)), lo, hi, fac.x_grid(left, right), fac.req.tol, description=label)


def _lambda_shelf(fac: FrameFactory, x: float, lam_grid: Sequence[float], label: str) -> MaslovResult:
    req = fac.req
    fixed = fac.right(req.lambda2)(x)

    def path(lam: float):
        return fac.left(lam)(x), fixed

    return spectral_flow(
        path, req.lambda1, req.lambda2, lam_grid, req.tol, phase_step=LAMBDA_PHASE_STEP, description=label
    )


def _caveat(fac: FrameFactory) -> tuple[bool, str]:
    req = fac.req
    lo, hi = req.path_range
    xm = 0.5 * (lo + hi)
    notes = []
    for name, lam in (("lambda1", req.lambda1), ("lambda2", req.lambda2)):
        k = intersection_dim(fac.left(lam)(xm), fac.right(lam)(xm), req.tol.kernel)
        if k > 0:
            notes.append(f"{name} = {lam} is an eigenvalue (multiplicity {k})")
    return bool(notes), "; ".join(notes)


def _gap_warning(req: EigencountRequest) -> str:
    gap = req.sys.defaults.gap
    if gap is None:
        return ""
    if req.lambda1 <= gap[0] or req.lambda2 >= gap[1]:
        return f"interval [{req.lambda1}, {req.lambda2}] is not inside the known gap {gap}"
    return ""


def _run(req: EigencountRequest, box: bool, lam_samples: int) -> EigencountReport:
    t0 = time.perf_counter()
    fac = FrameFactory(req)
    shelf = _x_shelf(fac, req.lambda1, req.lambda2, f"x-shelf at lambda1 = {req.lambda1} against lambda2 = {req.lambda2}")
    left, right = fac.left(req.lambda1), fac.right(req.lambda2)
    nul = nullity_sum(lambda x: (left(x), right(x)), fac.x_grid(left, right), req.tol)
    caveat, detail = _caveat(fac)
    report_box = None
    if box:
        report_box = box_for(fac, lam_samples)
    frames = {f"{k[0]}({k[1]})": v for k, v in fac.frames.items()}
    classes = {f"{k[0]}({k[1]})": v for k, v in fac.classifications.items()}
    return EigencountReport(
        count=shelf.index,
        points=shelf.points,
        shelf=shelf,
        nullity=nul,
        caveat=caveat,
        caveat_detail=detail,
        frames=frames,
        classifications=classes,
        box=report_box,
        gap_warning=_gap_warning(req),
        elapsed=time.perf_counter() - t0,
    )


def count_regular_singular(req: EigencountRequest, box: bool = False, lam_samples: int = 17) -> EigencountReport:
    """Count eigenvalues with a boundary matrix at the regular left endpoint.

    The right endpoint may be singular (the main case) or regular, which gives
    the truncated problems used for cross-checks.

    Args:
        req: The request; ``req.alpha`` must be set.
        box: Also evaluate the full four-shelf contour.
        lam_samples: Initial λ samples per λ-shelf when ``box`` is set.
    """
    if req.sys.kind_a != "regular":
        raise ContractViolation("count_regular_singular needs a regular left endpoint")
    return _run(req, box, lam_samples)


def count_singular_singular(req: EigencountRequest, box: bool = False, lam_samples: int = 17) -> EigencountReport:
    """Count eigenvalues when both endpoints are singular.

    The left frame at ``λ1`` is chosen among the finite-limit directions at
    ``a`` by the boundary condition ``req.basis_a``. The counting path is
    ``[x_min, x_max]``.
    """
    if req.sys.kind_a != "singular":
        raise ContractViolation("count_singular_singular needs a singular left endpoint")
    return _run(req, box, lam_samples)


def count(req: EigencountRequest, box: bool = False, lam_samples: int = 17) -> EigencountReport:
    """Dispatch on the kind of the left endpoint."""
    if req.sys.kind_a == "regular":
        return count_regular_singular(req, box, lam_samples)
    return count_singular_singular(req, box, lam_samples)


def box_for(fac: FrameFactory, lam_samples: int = 17) -> BoxReport:
    """Four-shelf contour: bottom and top at fixed ``x``, left and right at fixed λ."""
    req = fac.req
    lo, hi = req.path_range
    grid = np.linspace(req.lambda1, req.lambda2, lam_samples)
    shelves = {
        "bottom": _lambda_shelf(fac, lo, grid, f"x = {lo}, lambda increasing"),
        "right": _x_shelf(fac, req.lambda2, req.lambda2, f"lambda = {req.lambda2}, x increasing"),
        "top": _lambda_shelf(fac, hi, grid, f"x = {hi}, lambda increasing"),
        "left": _x_shelf(fac, req.lambda1, req.lambda2, f"lambda = {req.lambda1}, x increasing"),
    }
    orientation = {"bottom": 1, "right": 1, "top": -1, "left": -1}
    return maslov_box(shelves, orientation)


def triangle_loop(req: EigencountRequest, x: float | None = None, samples: int = 17) -> dict:
    """Flow around the triangle in the (λ, μ) plane for the pair ``ℓ_left(x; λ), ℓ_right(x; μ)``.

    The legs are ``λ = λ1`` with ``μ`` increasing, then ``μ = λ2`` with ``λ``
    increasing, then the diagonal ``λ = μ`` back to ``(λ1, λ1)``. The total is
    zero by homotopy invariance.

    Returns:
        A dict with the three ``MaslovResult`` legs and ``"total"``.
    """
    fac = FrameFactory(req)
    lo, hi = req.path_range
    xx = hi if x is None else float(x)
    l1, l2 = req.lambda1, req.lambda2
    grid = np.linspace(l1, l2, samples)
    step = LAMBDA_PHASE_STEP
    leg1 = spectral_flow(lambda m: (fac.left(l1)(xx), fac.right_at(m, xx)), l1, l2, grid, req.tol, step, "lambda = lambda1")
    leg2 = spectral_flow(lambda lam: (fac.left(lam)(xx), fac.right(l2)(xx)), l1, l2, grid, req.tol, step, "mu = lambda2")
    leg3 = spectral_flow(lambda lam: (fac.left(lam)(xx), fac.right_at(lam, xx)), l2, l1, grid, req.tol, step, "diagonal")
    return {"leg1": leg1, "leg2": leg2, "diagonal": leg3, "total": leg1.index + leg2.index + leg3.index}


# ----------------------------------------------------------------------------
# Spectral curves
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralCurves:
    """Conjugate points of ``(ℓ_left(·; λ), ℓ_right(·; λ2))`` over a λ grid.

    Attributes:
        lambdas: The λ grid.
        points: Per λ, the increasing conjugate-point abscissae.
        loci: Curve ``k`` collects the ``k``-th point from the left at every λ
            where there are more than ``k`` points, as ``(λ, x)`` rows.
        left_shelf: Flow at ``λ1``.
        top_shelf: Flow along the top of the box (``x = x_max``), when computed.
    """

    lambdas: np.ndarray
    points: tuple[tuple[float, ...], ...]
    loci: tuple[np.ndarray, ...]
    left_shelf: MaslovResult
    top_shelf: MaslovResult | None

    def is_monotone(self) -> bool:
        """Every locus moves right (weakly) as λ increases."""
        return all(np.all(np.diff(loc[:, 1]) >= -1e-6) for loc in self.loci if loc.shape[0] > 1)

    def to_rows(self) -> list[tuple[int, float, float]]:
        """``(curve, λ, x)`` rows for export."""
        rows = []
        for k, loc in enumerate(self.loci):
            rows += [(k, float(l), float(x)) for l, x in loc]
        return rows


def spectral_curves(
    req: EigencountRequest, lambdas: Sequence[float], top_shelf: bool = True, lam_samples: int = 17
) -> SpectralCurves:
    """Trace the conjugate points of the counting pair as λ varies.

    Args:
        req: The request (its ``lambda2`` fixes the right frame).
        lambdas: λ values in ``[λ1, λ2)``; each is an independent evaluation.
        top_shelf: Also evaluate the flow along ``x = x_max``.
        lam_samples: Initial λ samples for the top shelf.
    """
    fac = FrameFactory(req)
    lams = np.asarray(sorted(float(l) for l in lambdas))
    if lams.size == 0 or lams[0] < req.lambda1 or lams[-1] >= req.lambda2:
        raise ContractViolation("the λ grid must lie in [lambda1, lambda2)")
    pts = []
    left_res = None
    for lam in lams:
        res = _x_shelf(fac, lam, req.lambda2, f"lambda = {lam}")
        if lam == req.lambda1:
            left_res = res
        xs = []
        for p in res.points:
            xs += [p.t] * p.multiplicity if p.direction != 0 else []
        pts.append(tuple(sorted(xs)))
    if left_res is None:
        left_res = _x_shelf(fac, req.lambda1, req.lambda2, f"lambda = {req.lambda1}")
    width = max((len(p) for p in pts), default=0)
    loci = []
    for k in range(width):
        rows = [(lam, p[k]) for lam, p in zip(lams, pts) if len(p) > k]
        loci.append(np.array(rows))
    top = None
    if top_shelf:
        _, hi = req.path_range
        top = _lambda_shelf(fac, hi, np.linspace(req.lambda1, req.lambda2, lam_samples), "top shelf")
    return SpectralCurves(lams, tuple(pts), tuple(loci), left_res, top)
