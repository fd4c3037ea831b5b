"""Two-qudit pure states as d x d coefficient matrices.

A pure state sum_ij alpha_ij |ij> is held as the matrix alpha with
Tr(alpha^dag alpha) = 1.  This module provides overlaps, reduced
densities, the local-unitary invariants Tr[rho^p], the I-concurrence,
|det alpha|, the sector split alpha = D^(1/d) e^(i phi) e^M Sbar, and
constructors for states of prescribed entanglement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore, sud
from .errors import (
    BadExponent,
    BadSpectrum,
    DimensionMismatch,
    InadmissibleConcurrence,
    SingularState,
    UnreachableConcurrence,
)

NORM_TOL = 1e-10
SECTOR_DET_TOL = 1e-12
QDIR_TOL = 1e-10


def max_concurrence(d: int) -> float:
    """Largest I-concurrence of a two-qudit pure state: sqrt(2(d-1)/d)."""
    return float(np.sqrt(2.0 * (d - 1) / d))


@dataclass(frozen=True)
class TwoQuditState:
    """Normalized two-qudit pure state; ``alpha`` is read-only."""

    dim: int
    alpha: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = matcore.as_complex_matrix(self.alpha)
        if a.shape[0] != self.dim:
            raise DimensionMismatch(f"alpha is {a.shape[0]}x{a.shape[0]}, dim says {self.dim}")
        norm_sq = float(np.vdot(a, a).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {norm_sq!r} deviates from 1 beyond {NORM_TOL:g}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_matrix(cls, alpha, normalize: bool = False) -> "TwoQuditState":
        a = matcore.as_complex_matrix(alpha)
        if normalize:
            norm = np.sqrt(float(np.vdot(a, a).real))
            if norm == 0.0:
                raise ValueError("cannot normalize the zero matrix")
            a = a / norm
        return cls(dim=a.shape[0], alpha=a)


@dataclass(frozen=True)
class PolarSectors:
    """Sector split of a state matrix: alpha = D^(1/d) e^(i phi) e^M Sbar.

    ``det_magnitude`` is |det alpha|, ``phase`` the canonical global-phase
    sector in [0, 2*pi/d), ``q`` the PSD Hermitian factor, ``m`` the
    traceless Hermitian log of q / D^(1/d), and ``sbar`` the det-1 unitary.
    """

    det_magnitude: float
    phase: float
    q: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    sbar: np.ndarray = field(repr=False)


def overlap(phi_state: TwoQuditState, psi_state: TwoQuditState) -> complex:
    """<phi|psi> = Tr(beta^dag alpha) for coefficient matrices beta, alpha."""
    if phi_state.dim != psi_state.dim:
        raise DimensionMismatch("overlap requires equal dimensions")
    return complex(np.einsum("ij,ij->", phi_state.alpha.conj(), psi_state.alpha))


def reduced_density(state: TwoQuditState, subsystem: str) -> np.ndarray:
    """Reduced density labeled by the matrix convention.

    ``"A"`` returns alpha^T alpha^* (first index summed out), ``"B"``
    returns alpha alpha^dag (second index summed out).  Both are PSD
    Hermitian with unit trace and share all spectral invariants.
    """
    a = state.alpha
    if subsystem == "A":
        return a.T @ a.conj()
    if subsystem == "B":
        return a @ a.conj().T
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def _density_spectrum(state: TwoQuditState) -> np.ndarray:
    w, _ = matcore.herm_eig(reduced_density(state, "B"))
    return np.clip(w, 0.0, None)


def invariant(state: TwoQuditState, p: int) -> float:
    """Local-unitary invariant Tr[rho^p] for p in 1..d."""
    if not 1 <= p <= state.dim:
        raise BadExponent(f"exponent p = {p} outside 1..{state.dim}")
    return float(np.sum(_density_spectrum(state) ** p))


def concurrence(state: TwoQuditState) -> float:
    """I-concurrence sqrt(2 (1 - Tr[rho^2])); 0 for product states."""
    purity = invariant(state, 2) if state.dim >= 2 else 1.0
    return float(np.sqrt(max(2.0 * (1.0 - purity), 0.0)))


def det_invariant(state: TwoQuditState) -> float:
    """|det alpha|, invariant under local unitaries; for qubits C = 2 D."""
    return float(abs(np.linalg.det(state.alpha)))


def polar_sectors(state: TwoQuditState) -> PolarSectors:
    """Split the state matrix into determinant, phase, positive and SU parts.

    The phase sector is reported on the canonical branch [0, 2*pi/d).
    Raises SingularState (carrying D and q) when |det alpha| <= 1e-12.
    """
    a = state.alpha
    d = state.dim
    det_a = complex(np.linalg.det(a))
    det_mag = abs(det_a)
    w, v = matcore.herm_eig(a @ a.conj().T)
    w = np.where(w > 0.0, w, 0.0)
    mu = np.sqrt(w)  # eigenvalues of q
    q = (v * mu) @ v.conj().T
    if det_mag <= SECTOR_DET_TOL:
        raise SingularState(
            "det alpha vanishes; phase/SU sectors undefined", det_magnitude=det_mag, q=q
        )
    s = (v * (1.0 / mu)) @ v.conj().T @ a
    branch = 2.0 * np.pi / d
    phase = (np.angle(det_a) / d) % branch
    if phase >= branch:
        phase = 0.0
    sbar = np.exp(-1j * phase) * s
    m = (v * (np.log(mu) - np.log(det_mag) / d)) @ v.conj().T
    return PolarSectors(det_magnitude=det_mag, phase=float(phase), q=q, m=m, sbar=sbar)


def qhat(state: TwoQuditState, basis: sud.GeneratorBasis):
    """Direction and magnitude of the traceless part of Q^2.

    Q^2 = (1/d) I + magnitude * (qdir . T) with magnitude =
    sqrt(c_max^2 - C^2).  Returns (magnitude, qdir); qdir is None for
    maximally entangled states, where the direction is undefined.
    """
    if basis.dim != state.dim:
        raise DimensionMismatch("basis dimension differs from state dimension")
    q_sq = reduced_density(state, "B")
    _, c = sud.decompose_hermitian(q_sq, basis)
    magnitude = float(np.linalg.norm(c))
    if magnitude <= QDIR_TOL:
        return magnitude, None
    return magnitude, c / magnitude


def schmidt_state(d: int, spectrum) -> TwoQuditState:
    """State with alpha = diag(sqrt(spectrum)); order is preserved."""
    lam = np.asarray(spectrum, dtype=float)
    if lam.ndim != 1 or lam.size != d:
        raise BadSpectrum(f"spectrum must have length {d}")
    if lam.min() < -1e-14 or abs(lam.sum() - 1.0) > 1e-12:
        raise BadSpectrum("spectrum entries must be nonnegative and sum to 1")
    return TwoQuditState.from_matrix(np.diag(np.sqrt(np.clip(lam, 0.0, None))), normalize=True)


def _concurrence_of_split(d: int, a: float) -> float:
    rest = (1.0 - a) / (d - 1)
    purity = a * a + (d - 1) * rest * rest
    return float(np.sqrt(max(2.0 * (1.0 - purity), 0.0)))


def make_state(d: int, kind: str, *, spectrum=None, target=None) -> TwoQuditState:
    """Construct a reference state of the requested kind.

    kind = "product" gives diag(1, 0, ..., 0); "max_entangled" gives
    I/sqrt(d); "schmidt" uses the given spectrum verbatim;
    "concurrence_target" solves the one-parameter family
    (a, (1-a)/(d-1), ...) with a in [1/d, 1] for the requested
    I-concurrence by bisection.
    """
    d = int(d)
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if kind == "product":
        lam = np.zeros(d)
        lam[0] = 1.0
        return schmidt_state(d, lam)
    if kind == "max_entangled":
        return TwoQuditState.from_matrix(np.eye(d) / np.sqrt(d))
    if kind == "schmidt":
        if spectrum is None:
            raise BadSpectrum("kind='schmidt' requires a spectrum")
        return schmidt_state(d, spectrum)
    if kind == "concurrence_target":
        if target is None:
            raise ValueError("kind='concurrence_target' requires target=")
        c_max = max_concurrence(d)
        if not 0.0 <= target <= c_max + 1e-12:
            raise UnreachableConcurrence(f"target {target} outside [0, {c_max}]")
        # concurrence decreases from c_max to 0 as a runs over [1/d, 1]; its
        # slope diverges at a = 1, so the extremes are snapped exactly
        if target <= 1e-12:
            a = 1.0
        elif target >= c_max - 1e-12:
            a = 1.0 / d
        else:
            lo, hi = 1.0 / d, 1.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                if _concurrence_of_split(d, mid) > target:
                    lo = mid
                else:
                    hi = mid
            a = min((hi, lo), key=lambda v: abs(_concurrence_of_split(d, v) - target))
        lam = np.full(d, (1.0 - a) / (d - 1))
        lam[0] = a
        return schmidt_state(d, lam / lam.sum())
    raise ValueError(f"unknown state kind {kind!r}")


def vn_aligned_spectrum(d: int, c: float) -> np.ndarray:
    """Schmidt spectrum of the state whose Q^2 points along the last
    diagonal generator: ((1+x)/d, ..., (1+x)/d, (1+x(1-d))/d) with
    x = sqrt(1 - (c/c_max)^2).

    Positivity requires x <= 1/(d-1); outside that range the requested
    direction is not reachable and InadmissibleConcurrence is raised.
    """
    c_max = max_concurrence(d)
    if not 0.0 <= c <= c_max + 1e-12:
        raise UnreachableConcurrence(f"concurrence {c} outside [0, {c_max}]")
    x = np.sqrt(max(1.0 - (c / c_max) ** 2, 0.0))
    if x > 1.0 / (d - 1) + 1e-12:
        raise InadmissibleConcurrence(
            f"concurrence {c} gives a non-PSD squared positive factor at d = {d}"
        )
    lam = np.full(d, (1.0 + x) / d)
    lam[-1] = (1.0 + x * (1.0 - d)) / d
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum()


def vn_aligned_state(d: int, c: float) -> TwoQuditState:
    """Diagonal state whose Q^2 direction is the last diagonal generator."""
    return schmidt_state(d, vn_aligned_spectrum(d, c))


def vn_admissible_range(d: int):
    """Concurrence interval [c_min, c_max] for which vn_aligned_state exists."""
    c_max = max_concurrence(d)
    x_max = 1.0 / (d - 1)
    c_min = c_max * np.sqrt(max(1.0 - x_max * x_max, 0.0))
    return float(c_min), float(c_max)


def random_state(d: int, rng: np.random.Generator, min_det: float = 0.0) -> TwoQuditState:
    """Normalized Ginibre-random state, resampled until |det alpha| > min_det."""
    for _ in range(1000):
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        state = TwoQuditState.from_matrix(z, normalize=True)
        if min_det <= 0.0 or det_invariant(state) > min_det:
            return state
    raise RuntimeError("could not sample a state with the requested determinant")


def apply_local(state: TwoQuditState, ua, ub) -> TwoQuditState:
    """alpha -> U_A alpha U_B^T (one local-unitary application)."""
    ua = matcore.as_complex_matrix(ua)
    ub = matcore.as_complex_matrix(ub)
    if ua.shape[0] != state.dim or ub.shape[0] != state.dim:
        raise DimensionMismatch("local unitaries must match the state dimension")
    return TwoQuditState.from_matrix(ua @ state.alpha @ ub.T)


def save_state(state: TwoQuditState, path) -> None:
    """Write the plain-text matrix format: header 'd=<dim>', one row per
    line, entries formatted 're+imj' and separated by whitespace."""
    lines = [f"d={state.dim}"]
    for row in state.alpha:
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_state(path) -> TwoQuditState:
    """Read the plain-text matrix format written by :func:`save_state`."""
    with open(path, encoding="ascii") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or not lines[0].startswith("d="):
        raise ValueError("state file must start with a 'd=<dim>' header")
    d = int(lines[0][2:])
    if len(lines) != d + 1:
        raise ValueError(f"expected {d} matrix rows, found {len(lines) - 1}")
    rows = [[complex(tok) for tok in line.split()] for line in lines[1:]]
    return TwoQuditState.from_matrix(np.array(rows, dtype=np.complex128))
