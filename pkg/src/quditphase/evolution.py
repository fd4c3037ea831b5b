"""Local unitary paths and the three phase functionals.

A path is a uniformly sampled family (U_A(t), U_B(t)) of local unitaries,
stored as SU(d) parts plus separate U(1) phases phi_A, phi_B.  A state
evolves as alpha(t) = e^(i(phi_A+phi_B)) U_A(t) alpha(0) U_B(t)^T.  The
total phase is the argument of the overlap with the initial state, the
dynamical phase is the quadrature of Tr[rho_B(0) H_A] + Tr[rho_A(0) H_B]
with H_j = -i U_j^dag dU_j/dt, and the geometric phase is their
difference, which is invariant under the U(1) parts and under
reparametrization.

Built-in paths: the qubit Euler family U_m(theta, phi) V_3(chi), the
diagonal qudit family e^(i chi E) with E the distinguished traceless
diagonal generator, the kinked qutrit family with a Heaviside phase step,
and seeded random SU(d) x SU(d) paths with analytic generators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend, matcore, qstate, sud
from .errors import (
    BadAngleRange,
    DimensionMismatch,
    GridTooCoarse,
    InadmissibleConcurrence,
    NonCyclicZeta,
    NotUnitary,
    OpenPath,
    OrthogonalState,
)

DEFAULT_SAMPLES = 2001
MIN_SAMPLES = 101
ORTHOGONALITY_TOL = 1e-9
TWO_PI = 2.0 * np.pi

CSV_HEADER = "t,chi,re_overlap,im_overlap,abs_overlap,phi_tot,phi_dyn,phi_g,phi_g_unwrapped,concurrence"


def principal_angle(x):
    """Map angles to the principal branch (-pi, pi]."""
    return np.pi - (np.pi - np.asarray(x)) % TWO_PI


def angle_distance(x, y=0.0) -> float:
    """Distance between two angles on the circle."""
    return float(np.abs(principal_angle(np.asarray(x) - y)).max())


# ---------------------------------------------------------------------------
# path representation


@dataclass(frozen=True)
class UnitaryPath:
    """Sampled pair of local unitaries on a uniform grid over [0, tau].

    ``ua``/``ub`` hold the SU(d) parts (det = 1 to 1e-9); the U(1) parts
    are the separate phase arrays ``phi_a``/``phi_b``.  ``chi`` records the
    scalar path parameter for reporting (defaults to t).  ``ha``/``hb``
    are analytic generators -i U^dag dU/dt when the builder knows them;
    otherwise they are derived by fourth-order central differences.
    ``breakpoints`` are interior node indices where smoothness fails, and
    integrals are split there.  Paths start at the identity except for the
    Euler family with theta(0) != 0, which starts displaced;
    ``starts_at_identity`` records which.
    """

    dim: int
    tau: float
    times: np.ndarray = field(repr=False)
    ua: np.ndarray = field(repr=False)
    ub: np.ndarray = field(repr=False)
    phi_a: np.ndarray = field(repr=False)
    phi_b: np.ndarray = field(repr=False)
    chi: np.ndarray = field(repr=False)
    ha: np.ndarray | None = field(repr=False, default=None)
    hb: np.ndarray | None = field(repr=False, default=None)
    breakpoints: tuple = ()
    starts_at_identity: bool = True

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def grid_step(self) -> float:
        return self.tau / (self.n - 1)


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _unitarity_defects(us):
    d = us.shape[-1]
    gram = np.einsum("nki,nkj->nij", us.conj(), us, optimize=True)
    gram -= np.eye(d)
    return np.sqrt(np.einsum("nij,nij->n", gram, gram.conj()).real)


def _build_path(dim, tau, ua, ub, phi_a=None, phi_b=None, chi=None, ha=None, hb=None,
                breakpoints=()):
    n = ua.shape[0]
    if n < MIN_SAMPLES or n % 2 == 0:
        raise GridTooCoarse(f"paths need an odd sample count >= {MIN_SAMPLES}, got {n}")
    times = np.linspace(0.0, tau, n)
    for us, label in ((ua, "A"), (ub, "B")):
        if _unitarity_defects(us).max() > 1e-10:
            raise NotUnitary(f"side-{label} samples are not unitary to 1e-10")
        if np.abs(np.linalg.det(us) - 1.0).max() > 1e-9:
            raise NotUnitary(f"side-{label} samples leave SU({dim}) beyond 1e-9")
    eye = np.eye(dim)
    starts_at_identity = bool(
        max(matcore.frobenius(ua[0] - eye), matcore.frobenius(ub[0] - eye)) <= 1e-12
    )
    zeros = np.zeros(n)
    return UnitaryPath(
        dim=dim,
        tau=float(tau),
        times=_freeze(times),
        ua=_freeze(ua),
        ub=_freeze(ub),
        phi_a=_freeze(zeros if phi_a is None else np.asarray(phi_a, dtype=float)),
        phi_b=_freeze(zeros.copy() if phi_b is None else np.asarray(phi_b, dtype=float)),
        chi=_freeze(times.copy() if chi is None else np.asarray(chi, dtype=float)),
        ha=None if ha is None else _freeze(ha),
        hb=None if hb is None else _freeze(hb),
        breakpoints=tuple(int(b) for b in breakpoints),
        starts_at_identity=starts_at_identity,
    )


# ---------------------------------------------------------------------------
# schedules and finite differences


def _const_or_fn(spec_, times, name, lo=None, hi=None, exclusive_hi=False):
    if callable(spec_):
        vals = np.asarray([float(spec_(t)) for t in times])
    else:
        vals = np.full(times.shape[0], float(spec_))
    if lo is not None:
        above = vals.max() >= hi if exclusive_hi else vals.max() > hi + 1e-9
        if vals.min() < lo - 1e-9 or above:
            bracket = ")" if exclusive_hi else "]"
            raise BadAngleRange(f"{name} must stay within [{lo}, {hi}{bracket}")
    return vals


def _ramp_or_fn(spec_, times, tau, name):
    """Schedule that starts at 0: a number means a linear ramp to that value.

    Returns (values, rates); rates are exact for numbers and (f, fdot)
    pairs, fourth-order finite differences otherwise.
    """
    if isinstance(spec_, tuple):
        fn, dfn = spec_
        vals = np.asarray([float(fn(t)) for t in times])
        rates = np.asarray([float(dfn(t)) for t in times])
    elif callable(spec_):
        vals = np.asarray([float(spec_(t)) for t in times])
        rates = _central_diff4(vals, times[1] - times[0])
    else:
        end = float(spec_)
        vals = times * (end / tau)
        rates = np.full_like(vals, end / tau)
    if abs(vals[0]) > 1e-12:
        raise BadAngleRange(f"{name}(0) must vanish, got {vals[0]!r}")
    return vals, rates


_EDGE_STENCILS = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)


def _central_diff4(arr, h, blocks=None):
    """Fourth-order first derivative on a uniform grid, per smooth block."""
    arr = np.asarray(arr)
    n = arr.shape[0]
    out = np.empty_like(arr, dtype=np.result_type(arr.dtype, float))
    edges = [0, *sorted(blocks or ()), n - 1]
    for s, e in zip(edges[:-1], edges[1:]):
        if e - s + 1 < 5:
            raise GridTooCoarse("finite differences need at least 5 nodes per smooth block")
        seg = arr[s : e + 1]
        mid = (-seg[4:] + 8.0 * seg[3:-1] - 8.0 * seg[1:-3] + seg[:-4]) / (12.0 * h)
        out[s + 2 : e - 1] = mid
        head, second = _EDGE_STENCILS
        out[s] = np.tensordot(head, seg[:5], axes=(0, 0)) / h
        out[s + 1] = np.tensordot(second, seg[:5], axes=(0, 0)) / h
        out[e] = -np.tensordot(head, seg[-5:][::-1], axes=(0, 0)) / h
        out[e - 1] = -np.tensordot(second, seg[-5:][::-1], axes=(0, 0)) / h
    return out


def cumulative_simpson(y, dx, breakpoints=()):
    """Cumulative integral of samples ``y`` on a uniform grid of step ``dx``.

    Composite Simpson at even offsets within each smooth block; odd
    offsets use the three-point parabola over the partial interval.
    ``breakpoints`` are interior node indices where the integrand may be
    non-smooth; the integral is split there.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    out = np.zeros(n)
    edges = [0, *sorted(set(int(b) for b in breakpoints)), n - 1]
    for s, e in zip(edges[:-1], edges[1:]):
        if e <= s:
            continue
        if e - s == 1:
            out[e] = out[s] + 0.5 * dx * (y[s] + y[e])
            continue
        inc = np.empty(e - s)
        j = np.arange(s, e)
        m = j - s
        fwd_all = dx / 12.0 * (5.0 * y[s:e] + 8.0 * y[s + 1 : e + 1] - np.append(y[s + 2 : e + 1], 0.0))
        even = (m % 2 == 0) & (j + 2 <= e)
        inc[even] = fwd_all[even]
        odd = m % 2 == 1
        jo = j[odd]
        inc[odd] = dx / 3.0 * (y[jo - 1] + 4.0 * y[jo] + y[jo + 1]) - fwd_all[jo - 1 - s]
        last_even = (m % 2 == 0) & (j + 2 > e)
        if last_even.any():
            jl = j[last_even]
            inc[last_even] = dx / 12.0 * (-y[jl - 1] + 8.0 * y[jl] + 5.0 * y[jl + 1])
        out[s + 1 : e + 1] = out[s] + np.cumsum(inc)
    return out


def unwrap_angles(values, defined, max_smooth_step=None):
    """Continuity-track a sampled angle sequence across undefined gaps.

    Each step between consecutive defined samples is reduced to the
    principal branch; gaps produce events (last_index_before, first_after,
    signed_step).  ``max_smooth_step`` turns oversized gap-free steps into
    an UndersampledTrace error when given.  Undefined samples stay NaN.
    """
    from .errors import UndersampledTrace

    values = np.asarray(values, dtype=float)
    out = np.full_like(values, np.nan)
    idx = np.flatnonzero(np.asarray(defined, dtype=bool))
    if idx.size == 0:
        return out, []
    steps = principal_angle(values[idx[1:]] - values[idx[:-1]])
    gaps = np.diff(idx) > 1
    if max_smooth_step is not None and steps.size:
        smooth = np.abs(steps[~gaps])
        if smooth.size and smooth.max() > max_smooth_step:
            raise UndersampledTrace(
                f"largest gap-free phase step {smooth.max():.3g} exceeds {max_smooth_step:.3g}"
            )
    out[idx] = values[idx[0]] + np.concatenate([[0.0], np.cumsum(steps)])
    events = [
        (int(idx[i]), int(idx[i + 1]), float(steps[i])) for i in np.flatnonzero(gaps)
    ]
    return out, events


# ---------------------------------------------------------------------------
# built-in paths


def identity_path(d, tau=1.0, n=MIN_SAMPLES):
    """Constant path U_A = U_B = I (useful as a null reference)."""
    eye = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy()
    zeros = np.zeros((n, d, d), dtype=np.complex128)
    return _build_path(d, tau, eye, eye.copy(), ha=zeros, hb=zeros.copy(),
                       chi=np.zeros(n))


def qubit_euler_path(theta, phi, chi, tau=1.0, n=DEFAULT_SAMPLES):
    """Qubit path U_m(theta, phi) V_3(chi) on side A, identity on side B.

    U_m = e^(-i phi T3) e^(i theta T2) e^(i phi T3) and V_3 = e^(i chi T3).
    ``theta``/``phi`` may be constants or callables of t with theta in
    [0, pi) and phi in [0, 2 pi]; ``chi`` is a ramp schedule starting at 0
    (a number means a linear sweep to that value).  Generators come from
    fourth-order central differences.  For theta(0) != 0 the path starts
    displaced from the identity.
    """
    times = np.linspace(0.0, tau, n)
    th = _const_or_fn(theta, times, "theta", 0.0, np.pi, exclusive_hi=True)
    ph = _const_or_fn(phi, times, "phi", 0.0, TWO_PI)
    ch, _ = _ramp_or_fn(chi, times, tau, "chi")
    c, s = np.cos(th / 2.0), np.sin(th / 2.0)
    ua = np.empty((n, 2, 2), dtype=np.complex128)
    ua[:, 0, 0] = c * np.exp(0.5j * ch)
    ua[:, 0, 1] = s * np.exp(-0.5j * (2.0 * ph + ch))
    ua[:, 1, 0] = -s * np.exp(0.5j * (2.0 * ph + ch))
    ua[:, 1, 1] = c * np.exp(-0.5j * ch)
    ub = np.broadcast_to(np.eye(2, dtype=np.complex128), (n, 2, 2)).copy()
    return _build_path(2, tau, ua, ub, chi=ch, hb=np.zeros((n, 2, 2), dtype=np.complex128))


def vn_path(d, chi=TWO_PI, tau=1.0, n=DEFAULT_SAMPLES):
    """Diagonal path e^(i chi(t) E) on side A with exact generators.

    E is the traceless diagonal generator with entries 1/d (first d-1) and
    1/d - 1 (last); a full sweep chi: 0 -> 2 pi ends at e^(i 2 pi / d) I.
    """
    e_diag = np.diag(sud.vn_generator(d)).real
    times = np.linspace(0.0, tau, n)
    ch, rates = _ramp_or_fn(chi, times, tau, "chi")
    ua = np.zeros((n, d, d), dtype=np.complex128)
    idx = np.arange(d)
    ua[:, idx, idx] = np.exp(1j * np.outer(ch, e_diag))
    ha = rates[:, None, None] * np.diag(e_diag)[None, :, :].astype(np.complex128)
    ub = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy()
    return _build_path(d, tau, ua, ub, chi=ch, ha=ha,
                       hb=np.zeros((n, d, d), dtype=np.complex128))


def _piecewise_phases(ch, zeta):
    cycles = np.floor(ch / TWO_PI + 1e-15)
    rem = ch - TWO_PI * cycles
    step = np.where(rem > np.pi, 1.0, 0.0)  # Theta(0) = 0: the first branch owns chi = pi
    jump = 2.0 * (np.pi - zeta) / 3.0
    p1_cycle = 4.0 * np.pi / 3.0 + jump
    p2_cycle = -4.0 * np.pi / 3.0
    p1 = 2.0 * rem / 3.0 + jump * step + cycles * p1_cycle
    p2 = -2.0 * rem / 3.0 + cycles * p2_cycle
    p3 = -(p1 + p2)
    return np.stack([p1, p2, p3], axis=1)


def qutrit_piecewise_path(zeta=TWO_PI, chi=TWO_PI, tau=1.0, n=DEFAULT_SAMPLES):
    """Diagonal qutrit path with a Heaviside phase step at chi = pi.

    Diagonal phases phi_1 = 2 chi/3 + (2(pi - zeta)/3) Theta(chi - pi),
    phi_2 = -2 chi/3, phi_3 = -(phi_1 + phi_2), extended periodically for
    chi beyond 2 pi.  The endpoint closes to e^(i 2 pi/3) I only for
    zeta == 2 pi (mod 3 pi); other values draw a NonCyclicZeta warning.
    The step itself is an instantaneous unitary jump: generators are the
    branch derivatives and the jump contributes no dynamical phase.
    """
    residue = (float(zeta) - TWO_PI) % (3.0 * np.pi)
    if min(residue, 3.0 * np.pi - residue) > 1e-9:
        warnings.warn(
            f"zeta = {zeta!r} does not satisfy zeta == 2*pi (mod 3*pi); "
            "the path endpoint will not close onto a global phase",
            NonCyclicZeta,
        )
    times = np.linspace(0.0, tau, n)
    ch, rates = _ramp_or_fn(chi, times, tau, "chi")
    phases = _piecewise_phases(ch, float(zeta))
    ua = np.zeros((n, 3, 3), dtype=np.complex128)
    idx = np.arange(3)
    ua[:, idx, idx] = np.exp(1j * phases)
    gen_diag = np.diag([2.0 / 3.0, -2.0 / 3.0, 0.0]).astype(np.complex128)
    ha = rates[:, None, None] * gen_diag[None, :, :]
    ub = np.broadcast_to(np.eye(3, dtype=np.complex128), (n, 3, 3)).copy()
    cyc = np.floor(ch / TWO_PI + 1e-15)
    rem = ch - TWO_PI * cyc
    breakpoints = [
        k
        for k in range(1, n - 1)
        if cyc[k + 1] == cyc[k] and rem[k] <= np.pi < rem[k + 1]
    ]
    return _build_path(3, tau, ua, ub, chi=ch, ha=ha,
                       hb=np.zeros((n, 3, 3), dtype=np.complex128),
                       breakpoints=breakpoints)


def _smoothstep(u):
    # ramp with vanishing rate at both ends; keeps segment joins C^1
    return u - np.sin(TWO_PI * u) / TWO_PI, 1.0 - np.cos(TWO_PI * u)


def _random_su_side(d, rng, times, segments):
    n = times.shape[0]
    if (n - 1) % segments:
        raise GridTooCoarse(f"(n-1) = {n - 1} must be divisible by segments = {segments}")
    seg_len = (n - 1) // segments
    us = np.empty((n, d, d), dtype=np.complex128)
    hs = np.empty((n, d, d), dtype=np.complex128)
    start = np.eye(d, dtype=np.complex128)
    for j in range(segments):
        gen = matcore.random_traceless_hermitian(d, rng, scale=rng.uniform(0.5, 2.0))
        w, v = matcore.herm_eig(gen)
        lo = j * seg_len
        span = times[lo + seg_len] - times[lo]
        u = (times[lo : lo + seg_len + 1] - times[lo]) / span
        beta, beta_rate = _smoothstep(u)
        beta *= span
        seg_u = backend.kernels.unitary_from_phases(v, np.exp(1j * np.outer(beta, w)))
        seg_u = seg_u @ start
        conj = np.einsum("nji,jk,nkl->nil", seg_u.conj(), gen, seg_u, optimize=True)
        us[lo : lo + seg_len + 1] = seg_u
        hs[lo : lo + seg_len + 1] = beta_rate[:, None, None] * conj
        start = seg_u[-1]
    return us, hs


def random_su_path(d, rng, tau=1.0, n=DEFAULT_SAMPLES, segments=4, sides="both"):
    """Seeded random SU(d) x SU(d) path: per-segment exponentials of random
    traceless Hermitian generators, joined with a smoothstep ramp so the
    analytic generators are continuous."""
    times = np.linspace(0.0, tau, n)
    eye = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy()
    zero = np.zeros((n, d, d), dtype=np.complex128)
    ua, ha = (eye, zero) if sides == "b" else _random_su_side(d, rng, times, segments)
    ub, hb = (eye.copy(), zero.copy()) if sides == "a" else _random_su_side(d, rng, times, segments)
    seg_len = (n - 1) // segments
    breakpoints = [j * seg_len for j in range(1, segments)] if sides != "none" else []
    return _build_path(d, tau, ua, ub, ha=ha, hb=hb, breakpoints=breakpoints)


def with_u1_phases(path, phi_a=None, phi_b=None):
    """Copy of the path with explicit U(1) phase schedules (vanishing at 0)."""
    def sampled(fn, current):
        if fn is None:
            return current
        vals = np.asarray([float(fn(t)) for t in path.times])
        if abs(vals[0]) > 1e-12:
            raise ValueError("U(1) phases must vanish at t = 0")
        return _freeze(vals)

    return replace(path, phi_a=sampled(phi_a, path.phi_a), phi_b=sampled(phi_b, path.phi_b))


# ---------------------------------------------------------------------------
# evolution and phase traces


def _check_pair(state0, path):
    if state0.dim != path.dim:
        raise DimensionMismatch("state and path dimensions differ")


def evolve(state0: qstate.TwoQuditState, path: UnitaryPath, k: int) -> qstate.TwoQuditState:
    """State at grid index k: e^(i(phi_A+phi_B)) U_A alpha(0) U_B^T."""
    _check_pair(state0, path)
    u1 = np.exp(1j * (path.phi_a[k] + path.phi_b[k]))
    alpha = u1 * (path.ua[k] @ state0.alpha @ path.ub[k].T)
    return qstate.TwoQuditState.from_matrix(alpha)


def _generators(path):
    if path.ha is not None and path.hb is not None:
        return path.ha, path.hb
    h = path.grid_step
    out = []
    for us in (path.ua, path.ub):
        du = _central_diff4(us, h, blocks=path.breakpoints)
        gen = -1j * np.einsum("nji,njk->nik", us.conj(), du, optimize=True)
        out.append(0.5 * (gen + gen.conj().transpose(0, 2, 1)))
    return out[0], out[1]


@dataclass(frozen=True)
class PhaseTrace:
    """Per-sample record of overlap and phases along one evolution.

    ``phi_tot`` is the principal argument of the SU-part overlap plus the
    accumulated U(1) phases, ``phi_dyn`` the quadrature plus the same U(1)
    phases, ``phi_g`` the principal value of their difference and
    ``phi_g_unwrapped`` its continuity-tracked version.  Samples whose
    overlap is below the orthogonality tolerance carry NaN phases and are
    flagged in ``orthogonal``.
    """

    dim: int | None
    times: np.ndarray = field(repr=False)
    chi: np.ndarray = field(repr=False)
    overlap: np.ndarray = field(repr=False)
    phi_tot: np.ndarray = field(repr=False)
    phi_dyn: np.ndarray = field(repr=False)
    phi_g: np.ndarray = field(repr=False)
    phi_g_unwrapped: np.ndarray = field(repr=False)
    concurrence: np.ndarray = field(repr=False)
    orthogonal: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.times.shape[0]


def compute_phase_trace(state0, path, orth_tol=ORTHOGONALITY_TOL) -> PhaseTrace:
    """Evaluate overlap, total/dynamical/geometric phases along a path."""
    _check_pair(state0, path)
    a0 = state0.alpha
    ub_t = np.ascontiguousarray(path.ub.transpose(0, 2, 1))
    ov_su = backend.kernels.trace_product_series(
        np.ascontiguousarray(a0.conj().T), path.ua, a0, ub_t
    )
    u1 = path.phi_a + path.phi_b
    overlap = np.exp(1j * u1) * ov_su
    orthogonal = np.abs(ov_su) < orth_tol
    ang = np.where(orthogonal, np.nan, np.angle(ov_su))
    h_a, h_b = _generators(path)
    rho_b = qstate.reduced_density(state0, "B")
    rho_a = qstate.reduced_density(state0, "A")
    integrand = backend.kernels.dyn_integrand_series(rho_b, h_a, rho_a, h_b)
    quad = cumulative_simpson(integrand, path.grid_step, path.breakpoints)
    tracked, _ = unwrap_angles(ang, ~orthogonal)
    alphas = backend.kernels.conjugate_series(path.ua, a0, ub_t)
    purity = backend.kernels.purity_series(alphas)
    conc = np.sqrt(np.clip(2.0 * (1.0 - purity), 0.0, None))
    return PhaseTrace(
        dim=state0.dim,
        times=_freeze(path.times.copy()),
        chi=_freeze(path.chi.copy()),
        overlap=_freeze(overlap),
        phi_tot=_freeze(u1 + ang),
        phi_dyn=_freeze(u1 + quad),
        phi_g=_freeze(principal_angle(ang - quad)),
        phi_g_unwrapped=_freeze(tracked - quad),
        concurrence=_freeze(conc),
        orthogonal=_freeze(orthogonal),
    )


def total_phase(state0, path, k, unwrapped=False) -> float:
    """arg<psi(0)|psi(t_k)> plus the accumulated U(1) phases."""
    trace = compute_phase_trace(state0, path)
    if trace.orthogonal[k]:
        raise OrthogonalState(f"overlap vanishes at sample {k}; total phase undefined")
    if unwrapped:
        tracked, _ = unwrap_angles(trace.phi_tot, ~trace.orthogonal)
        return float(tracked[k])
    return float(trace.phi_tot[k])


def dynamical_phase(state0, path, k) -> float:
    """Quadrature of the generator expectation up to t_k, plus U(1) phases."""
    trace = compute_phase_trace(state0, path)
    return float(trace.phi_dyn[k])


def geometric_phase(state0, path, k) -> float:
    """Continuity-tracked total minus dynamical phase at t_k.

    Independent of the U(1) parts of the path (they cancel exactly) and of
    monotone reparametrization.
    """
    trace = compute_phase_trace(state0, path)
    if trace.orthogonal[k]:
        raise OrthogonalState(f"overlap vanishes at sample {k}; geometric phase undefined")
    return float(trace.phi_g_unwrapped[k])


def dyn_term_integrand(state0, path, k) -> float:
    """Pointwise value Tr[rho_B(0) H_A(t_k)] + Tr[rho_A(0) H_B(t_k)]."""
    _check_pair(state0, path)
    h_a, h_b = _generators(path)
    rho_b = qstate.reduced_density(state0, "B")
    rho_a = qstate.reduced_density(state0, "A")
    return float(
        backend.kernels.dyn_integrand_series(
            rho_b, h_a[k : k + 1], rho_a, h_b[k : k + 1]
        )[0]
    )


def pancharatnam_phase(state0, path, k, step_tol=1e-12) -> float:
    """Discrete gauge-invariant estimator of the geometric phase.

    arg<psi(0)|psi(t_k)> - sum_j arg<psi(t_j)|psi(t_j+1)>; agrees with
    total - dynamical up to a multiple of 2 pi away from orthogonality
    crossings.
    """
    _check_pair(state0, path)
    a0 = state0.alpha
    ub_t = np.ascontiguousarray(path.ub.transpose(0, 2, 1))
    alphas = backend.kernels.conjugate_series(path.ua, a0, ub_t)
    alphas = np.exp(1j * (path.phi_a + path.phi_b))[:, None, None] * alphas
    end = complex(np.einsum("ij,ij->", alphas[0].conj(), alphas[k]))
    steps = np.einsum("nij,nij->n", alphas[:k].conj(), alphas[1 : k + 1])
    if abs(end) < step_tol or (np.abs(steps) < step_tol).any():
        raise OrthogonalState("estimator undefined across an orthogonality crossing")
    return float(np.angle(end) - np.angle(steps).sum())


# ---------------------------------------------------------------------------
# closed forms


def qubit_overlap_closed_form(c, theta, chi, phi_a=0.0):
    """Qubit overlap e^(i phi_A) cos(theta/2) [cos(chi/2) + i x sin(chi/2)]
    with x = sqrt(1 - C^2), valid for the Euler family with the squared
    positive factor aligned to the third axis."""
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise ValueError(f"qubit concurrence must lie in [0, 1], got {c}")
    x = np.sqrt(max(1.0 - c * c, 0.0))
    chi = np.asarray(chi, dtype=float)
    val = np.exp(1j * phi_a) * np.cos(theta / 2.0) * (
        np.cos(chi / 2.0) + 1j * x * np.sin(chi / 2.0)
    )
    return val if val.ndim else complex(val)


def tracked_two_frequency_arg(x, chi):
    """Continuously tracked arg of cos(chi/2) + i x sin(chi/2) for x >= 0.

    Equals the principal arctan(x tan(chi/2)) continued through its branch
    points; at x = 0 it becomes the step function jumping by pi at odd
    multiples of pi.
    """
    chi = np.asarray(chi, dtype=float)
    m = np.floor(chi / TWO_PI + 0.5)
    w = chi - TWO_PI * m
    out = np.pi * m + np.arctan2(x * np.sin(w / 2.0), np.cos(w / 2.0))
    return out if out.ndim else float(out)


def qubit_geometric_phase_closed_form(c, chi, frame_term=0.0):
    """Closed-form qubit geometric phase
    arctan[x tan(chi/2)] - x chi/2 + x frame_term/2, x = sqrt(1 - C^2),
    with the arctan term continuity-tracked (never principal-branch).

    ``chi`` is the accumulated sweep angle.  ``frame_term`` is the moving
    frame line integral; its orientation is opposite to
    :func:`solid_angle`, so when comparing against the numeric pipeline on
    a closed (theta, phi) loop pass frame_term = -solid_angle(...).
    """
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise ValueError(f"qubit concurrence must lie in [0, 1], got {c}")
    x = np.sqrt(max(1.0 - c * c, 0.0))
    return tracked_two_frequency_arg(x, chi) - x * np.asarray(chi) / 2.0 + x * frame_term / 2.0


def vn_coefficients(d, c):
    """Overlap weights (A, B) of the diagonal path on the aligned state.

    A = (d-1)/d + (c_max/2) sqrt(c_max^2 - C^2) and B = 1 - A, from the
    trace of the squared positive factor against the two eigenprojectors
    of the path generator.  Requires the aligned state to exist
    (InadmissibleConcurrence otherwise).
    """
    c_max = qstate.max_concurrence(d)
    if not 0.0 <= c <= c_max + 1e-12:
        raise ValueError(f"concurrence must lie in [0, {c_max}], got {c}")
    x = np.sqrt(max(1.0 - (c / c_max) ** 2, 0.0))
    if x > 1.0 / (d - 1) + 1e-12:
        raise InadmissibleConcurrence(
            f"concurrence {c} below the aligned-state range at d = {d}"
        )
    a = (d - 1) / d * (1.0 + x)
    return a, 1.0 - a


def vn_overlap_closed_form(d, c, chi):
    """Overlap A e^(i chi/d) + B e^(i(1-d) chi/d) of the diagonal path on
    the aligned state; |overlap|^2 has minimum (A-B)^2 at chi = pi."""
    a, b = vn_coefficients(d, c)
    chi = np.asarray(chi, dtype=float)
    val = a * np.exp(1j * chi / d) + b * np.exp(1j * (1.0 - d) * chi / d)
    return val if val.ndim else complex(val)


def vn_dynamical_rate(d, c) -> float:
    """d(phi_dyn)/d(chi) on the diagonal path for the aligned state:
    (c_max/2) sqrt(c_max^2 - C^2)."""
    c_max = qstate.max_concurrence(d)
    return float(0.5 * c_max * np.sqrt(max(c_max * c_max - c * c, 0.0)))


def vn_geometric_phase_closed_form(d, c, chi):
    """Geometric phase on the diagonal path: continuity-tracked arg of the
    closed-form overlap minus vn_dynamical_rate(d, c) * chi.

    ``chi`` must be a dense increasing grid starting at 0 (the tracking is
    discrete).
    """
    chi = np.asarray(chi, dtype=float)
    ov = vn_overlap_closed_form(d, c, chi)
    ang = np.angle(ov)
    defined = np.abs(ov) > ORTHOGONALITY_TOL
    tracked, _ = unwrap_angles(np.where(defined, ang, np.nan), defined)
    return tracked - vn_dynamical_rate(d, c) * chi


def qutrit_piecewise_overlap_maxent(chi, zeta=TWO_PI):
    """Closed-form overlap of the kinked qutrit path on the maximally
    entangled state: (1/3)[1 + 2 cos(2 chi/3)] for chi in [0, pi], then
    (1/3)[1 + 2 cos(2(chi+pi)/3)] e^(i 2 pi/3), extended per cycle."""
    del zeta  # any zeta == 2*pi (mod 3*pi) yields the same unitaries
    chi = np.asarray(chi, dtype=float)
    cycles = np.floor(chi / TWO_PI + 1e-15)
    rem = chi - TWO_PI * cycles
    first = (1.0 + 2.0 * np.cos(2.0 * rem / 3.0)) / 3.0
    second = (1.0 + 2.0 * np.cos(2.0 * (rem + np.pi) / 3.0)) / 3.0 * np.exp(2j * np.pi / 3.0)
    val = np.where(rem <= np.pi, first, second) * np.exp(2j * np.pi * cycles / 3.0)
    return val if val.ndim else complex(val)


# ---------------------------------------------------------------------------
# moving-frame functional


_PAULIS = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=np.complex128
)


def solid_angle(theta, phi, tau=1.0, n=DEFAULT_SAMPLES) -> float:
    """Line integral of frame-1 against the rate of frame-2 along a closed
    (theta, phi) loop; for closed loops it equals the enclosed solid angle
    (mod 4 pi), positive for a circuit of increasing phi.

    The frame is built from the Euler rotation U_m conjugating the Pauli
    matrices.  Raises OpenPath when the loop endpoints do not match.
    """
    times = np.linspace(0.0, tau, n)
    th = _const_or_fn(theta, times, "theta", 0.0, np.pi, exclusive_hi=True)
    ph = _const_or_fn(phi, times, "phi")
    if abs(th[-1] - th[0]) > 1e-10 or angle_distance(ph[-1] - ph[0]) > 1e-10:
        raise OpenPath("(theta, phi) endpoints do not close")
    c, s = np.cos(th / 2.0), np.sin(th / 2.0)
    u = np.empty((n, 2, 2), dtype=np.complex128)
    u[:, 0, 0] = c
    u[:, 0, 1] = s * np.exp(-1j * ph)
    u[:, 1, 0] = -s * np.exp(1j * ph)
    u[:, 1, 1] = c
    rotated = np.einsum("nij,ajk,nlk->nail", u, _PAULIS[:2], u.conj(), optimize=True)
    frames = 0.5 * np.einsum("bij,naji->nab", _PAULIS, rotated, optimize=True).real
    m1 = frames[:, 0, :]
    dm2 = _central_diff4(frames[:, 1, :], times[1] - times[0])
    rate = np.einsum("nb,nb->n", m1, dm2)
    return float(cumulative_simpson(rate, times[1] - times[0])[-1])


# ---------------------------------------------------------------------------
# trace serialization


def _fmt(value: float) -> str:
    return format(value, ".12g")


def write_phase_trace_csv(trace: PhaseTrace, path) -> None:
    """Write the fixed-header CSV, 12 significant digits per value."""
    lines = [CSV_HEADER]
    for k in range(trace.n):
        ov = trace.overlap[k]
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    trace.times[k],
                    trace.chi[k],
                    ov.real,
                    ov.imag,
                    abs(ov),
                    trace.phi_tot[k],
                    trace.phi_dyn[k],
                    trace.phi_g[k],
                    trace.phi_g_unwrapped[k],
                    trace.concurrence[k],
                )
            )
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_phase_trace_csv(path) -> PhaseTrace:
    """Parse a CSV produced by :func:`write_phase_trace_csv`."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 10:
        raise ValueError(f"expected 10 columns, found {data.shape[1]}")
    overlap = data[:, 2] + 1j * data[:, 3]
    return PhaseTrace(
        dim=None,
        times=_freeze(data[:, 0]),
        chi=_freeze(data[:, 1]),
        overlap=_freeze(overlap),
        phi_tot=_freeze(data[:, 5]),
        phi_dyn=_freeze(data[:, 6]),
        phi_g=_freeze(data[:, 7]),
        phi_g_unwrapped=_freeze(data[:, 8]),
        concurrence=_freeze(data[:, 9]),
        orthogonal=_freeze(np.isnan(data[:, 5])),
    )
