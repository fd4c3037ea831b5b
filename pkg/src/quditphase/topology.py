"""Cyclicity detection, homotopy classes, trace unwrapping and crossings.

A cyclic evolution multiplies the state matrix by a global phase; taking
determinants forces that phase onto the lattice 2*pi*n/d whenever
|det alpha| != 0, and n mod d labels the homotopy class of the loop.
Quantization is *measured* here, never assumed: check_cyclic reports the
distance of d*delta_phi from the lattice and refuses to classify when it
is too large.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import qstate
from .errors import DimensionMismatch, NotQuantized
from .evolution import PhaseTrace, principal_angle, unwrap_angles

CYCLIC_TOL = 1e-8
DET_TOL = 1e-12
CROSSING_TOL = 1e-6


def quantization_defect(delta_phi: float, d: int) -> float:
    """Distance of d * delta_phi from the nearest multiple of 2*pi."""
    return float(abs(principal_angle(d * delta_phi)))


@dataclass(frozen=True)
class CycleReport:
    """Outcome of a cyclicity check.

    ``delta_phi`` is defined mod 2*pi; ``class_n`` is the homotopy class
    in 0..d-1, or None when the evolution is not cyclic or |det alpha| is
    too small for the determinant argument to apply; ``residual`` is the
    Frobenius defect of alpha(tau) against e^(i delta_phi) alpha(0).
    """

    cyclic: bool
    delta_phi: float
    class_n: int | None
    residual: float

    def to_line(self) -> str:
        n = "na" if self.class_n is None else str(self.class_n)
        return (
            f"cyclic={1 if self.cyclic else 0} delta_phi={self.delta_phi:.12g} "
            f"class_n={n} residual={self.residual:.12g}"
        )


def check_cyclic(state0, state_tau, tol: float = CYCLIC_TOL) -> CycleReport:
    """Compare the evolved state against a global phase times the start.

    When cyclic and |det alpha| > 1e-12, asserts dist(d*delta_phi, 2*pi*Z)
    <= d*tol (raising NotQuantized otherwise) and assigns the class
    round(d*delta_phi/2*pi) mod d.  Singular states get class_n = None:
    the quantization claim is withheld, not failed.
    """
    if state0.dim != state_tau.dim:
        raise DimensionMismatch("states have different dimensions")
    d = state0.dim
    delta_phi = float(np.angle(qstate.overlap(state0, state_tau)))
    residual = float(
        np.linalg.norm(state_tau.alpha - np.exp(1j * delta_phi) * state0.alpha)
    )
    cyclic = residual <= tol
    class_n = None
    if cyclic and qstate.det_invariant(state0) > DET_TOL:
        defect = quantization_defect(delta_phi, d)
        if defect > d * tol:
            raise NotQuantized(
                f"d*delta_phi is {defect:.3g} away from 2*pi*Z (limit {d * tol:.3g})"
            )
        class_n = int(np.round(d * delta_phi / (2.0 * np.pi))) % d
    return CycleReport(cyclic=cyclic, delta_phi=delta_phi, class_n=class_n, residual=residual)


def homotopy_class(delta_phi: float, d: int) -> int:
    """Class n = round(d*delta_phi/2*pi) mod d of a quantized cyclic phase."""
    defect = quantization_defect(delta_phi, d)
    if defect > 1e-6:
        raise NotQuantized(f"d*delta_phi is {defect:.3g} away from 2*pi*Z")
    return int(np.round(d * delta_phi / (2.0 * np.pi))) % d


def unwrap_phase_trace(trace: PhaseTrace, max_smooth_step: float = np.pi / 2.0):
    """Continuity-track the geometric phase of a trace.

    Returns (new trace with phi_g_unwrapped rebuilt from the principal
    column, jumps) where jumps is a list of (t, signed size) events, one
    per orthogonality gap bridged.  Gap-free steps larger than
    ``max_smooth_step`` raise UndersampledTrace.  The operation is
    idempotent: it never alters phi_g or the orthogonality flags it reads.
    """
    defined = ~trace.orthogonal & np.isfinite(trace.phi_g)
    unwrapped, events = unwrap_angles(trace.phi_g, defined, max_smooth_step=max_smooth_step)
    jumps = [(float(trace.times[prev + 1]), size) for prev, _cur, size in events]
    return replace(trace, phi_g_unwrapped=unwrapped), jumps


def orthogonality_crossings(trace: PhaseTrace, tol: float = CROSSING_TOL):
    """Times where the overlap magnitude dips below ``tol``.

    Consecutive flagged samples form one crossing; within each cluster the
    minimum of |overlap|^2 is refined by a local parabola fit.
    """
    mag_sq = np.abs(trace.overlap) ** 2
    flagged = np.flatnonzero(np.abs(trace.overlap) < tol)
    if flagged.size == 0:
        return []
    clusters = np.split(flagged, np.flatnonzero(np.diff(flagged) > 1) + 1)
    times = []
    n = trace.n
    for cluster in clusters:
        k = int(cluster[np.argmin(mag_sq[cluster])])
        if 0 < k < n - 1:
            denom = mag_sq[k + 1] - 2.0 * mag_sq[k] + mag_sq[k - 1]
            shift = 0.0
            if denom > 0.0:
                shift = 0.5 * (mag_sq[k - 1] - mag_sq[k + 1]) / denom
            shift = float(np.clip(shift, -1.0, 1.0))
            step = trace.times[1] - trace.times[0]
            times.append(float(trace.times[k] + shift * step))
        else:
            times.append(float(trace.times[k]))
    return times
