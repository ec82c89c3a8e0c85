"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so that a run can be repeated with
tightened or loosened settings by building a modified copy.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Default numerical settings.

    Attributes:
        ode_rtol: Relative tolerance of the adaptive Runge-Kutta integrator.
        ode_atol: Absolute tolerance of the adaptive Runge-Kutta integrator.
        hermitian: Allowed Hermiticity defect, relative to the matrix norm.
        unitary: Allowed defect ``‖U*U - I‖`` for unitary inputs.
        rcond_min: Smallest reciprocal condition number accepted by ``solve``.
        lagrangian: Allowed ``‖F*JF‖ / ‖F‖²`` for frames flagged Lagrangian.
        kernel: Singular-value threshold used for intersection dimensions.
        plateau: Relative variation below which an eigen-track counts as settled.
        divergence_factor: A track larger than this multiple of the initial
            scale is treated as divergent.
        stabilization_angle: Largest accepted angle between the limiting
            eigenvectors at the last two probes.
        localization: Half-width to which conjugate points are bisected.
        phase_fixed: Distance from ``pi`` below which an eigenphase is taken to
            sit exactly at ``-1`` (used for endpoint and plateau rules).
        phase_step: Largest eigenphase motion allowed between consecutive
            path samples before a midpoint is inserted.
        min_approach: Smallest distance from a finite singular endpoint at
            which coefficients are evaluated.
        refine_ratio: Eigenvalues of the accumulated quadrature matrix whose
            magnitude falls below this fraction of the largest one are
            recomputed by a Rayleigh-Ritz pass on stably integrated solutions.
        overlap_min: Smallest eigenvector overlap accepted when matching
            eigen-tracks between neighbouring probes.
        growth_restart: Norm growth of a transported frame that triggers a
            column re-orthonormalization.
    """

    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    hermitian: float = 1e-9
    unitary: float = 1e-8
    rcond_min: float = 1e-13
    lagrangian: float = 1e-8
    kernel: float = 1e-6
    plateau: float = 1e-3
    divergence_factor: float = 1e6
    stabilization_angle: float = 1e-4
    localization: float = 1e-3
    phase_fixed: float = 1e-9
    phase_step: float = 0.5 * 3.141592653589793
    min_approach: float = 1e-6
    refine_ratio: float = 1e-6
    overlap_min: float = 0.5
    growth_restart: float = 1e4

    def with_ode(self, rtol: float, atol: float) -> "Tolerances":
        """Return a copy with new integrator tolerances."""
        return replace(self, ode_rtol=rtol, ode_atol=atol)


DEFAULT_TOLERANCES = Tolerances()
