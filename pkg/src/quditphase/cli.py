"""Scenario runner: figure trajectories and numeric audits as flat files.

Subcommands: fig1, fig2a, fig2b, audit-quantization, dyn-vanishing,
evolve.  Every run validates the model properties of the scenario it
reproduces and exits 2 when one fails numerically; usage errors exit 1.
Identical scenario + seed yields byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import backend, evolution, matcore, qstate, sud, topology
from .errors import BadConcurrence, NotQuantized, PropertyViolation, QuditPhaseError

TWO_PI = 2.0 * np.pi

FIG1_CONCURRENCES = (0.0, 0.4, 0.8, 0.95, 1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise PropertyViolation(message)


def _trial_rngs(seed: int, count: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _write_lines(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# scenario runners


def run_fig1(concurrences=FIG1_CONCURRENCES, theta=0.0, samples=2001, outdir="out"):
    """Qubit overlap trajectories chi: 0 -> 2*pi, one CSV per concurrence.

    The maximally entangled trace degenerates to the real axis and the
    product-state trace at theta = 0 to the unit circle; every trace is
    checked pointwise against the closed-form overlap.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for c in concurrences:
        if not 0.0 <= c <= 1.0:
            raise BadConcurrence(f"qubit concurrence {c} outside [0, 1]")
        state = qstate.make_state(2, "concurrence_target", target=c)
        path = evolution.qubit_euler_path(theta, 0.0, TWO_PI, n=samples)
        trace = evolution.compute_phase_trace(state, path)
        closed = evolution.qubit_overlap_closed_form(c, theta, trace.chi)
        _check(
            float(np.abs(trace.overlap - closed).max()) <= 1e-10,
            f"fig1 C={c}: overlap deviates from the closed form",
        )
        if c == 1.0:
            _check(
                float(np.abs(trace.overlap.imag).max()) <= 1e-10,
                "fig1 C=1: trajectory left the real axis",
            )
        if c == 0.0 and theta == 0.0:
            _check(
                float(np.abs(np.abs(trace.overlap) - 1.0).max()) <= 1e-10,
                "fig1 C=0: trajectory left the unit circle",
            )
        dest = outdir / f"fig1_c{format(c, '.6g')}.csv"
        evolution.write_phase_trace_csv(trace, dest)
        written.append(dest)
    return written


def run_fig2(variant="a", zeta=TWO_PI, samples=2001, outdir="out"):
    """Qutrit overlap (variant a) or geometric-phase (variant b) traces.

    Both the smooth diagonal path and the kinked path run at maximal
    concurrence; variant b accumulates two cycles so the phase visits all
    of 0, 2*pi/3, 4*pi/3.
    """
    if variant not in ("a", "b"):
        raise ValueError("variant must be 'a' or 'b'")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cycles = 1 if variant == "a" else 2
    n = samples if cycles == 1 else 2 * samples - 1
    state = qstate.make_state(3, "max_entangled")
    vn = evolution.vn_path(3, chi=cycles * TWO_PI, n=n)
    pw = evolution.qutrit_piecewise_path(zeta=zeta, chi=cycles * TWO_PI, n=n)
    vn_trace = evolution.compute_phase_trace(state, vn)
    pw_trace = evolution.compute_phase_trace(state, pw)
    if variant == "a":
        _check(
            abs(float(np.abs(vn_trace.overlap).min()) - 1.0 / 3.0) <= 1e-9,
            "fig2a: smooth-path overlap minimum is not 1/3",
        )
        _check(
            float(np.abs(pw_trace.overlap).min()) <= 1e-9,
            "fig2a: kinked path does not reach the origin",
        )
    else:
        plateaus = np.array([0.0, TWO_PI / 3.0, 2.0 * TWO_PI / 3.0])
        for trace in (vn_trace, pw_trace):
            boundary = np.flatnonzero(
                np.isclose(trace.chi % TWO_PI, 0.0, atol=1e-9)
                | np.isclose(trace.chi % TWO_PI, TWO_PI, atol=1e-9)
            )
            values = trace.phi_g_unwrapped[boundary]
            values = values[np.isfinite(values)]
            _check(
                float(np.abs(values[:, None] - plateaus[None, :]).min(axis=1).max()) <= 1e-6,
                "fig2b: plateau values stray from {0, 2*pi/3, 4*pi/3}",
            )
    written = []
    for name, trace in (("vn", vn_trace), ("piecewise", pw_trace)):
        dest = outdir / f"fig2{variant}_{name}.csv"
        evolution.write_phase_trace_csv(trace, dest)
        written.append(dest)
    return written


def run_audit_quantization(d_list=(2, 3, 5), trials=100, seed=0, outdir="out"):
    """Cyclic diagonal sweeps on random states: measure the phase lattice.

    Per trial: a random state with |det alpha| > 1e-6 and a random frame
    W in SU(d); the cycle unitary W e^(i 2 pi k E) W^dag is applied on a
    random side for k = 1 and one composed k in 2..d+1.  The report lists
    one cycle record per line plus the worst lattice distance.  One
    singular state per d is injected and must come back withheld (class
    'na'), not failed.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = []
    max_defect = 0.0
    for d in d_list:
        e_diag = np.diag(sud.vn_generator(d)).real
        for t, rng in enumerate(_trial_rngs(seed + d, trials)):
            state = qstate.random_state(d, rng, min_det=1e-6)
            w = matcore.haar_special_unitary(d, rng)
            k = int(rng.integers(2, d + 2))
            side = "a" if rng.integers(2) else "b"
            for kind, reps in (("vn", 1), ("composed", k)):
                u_end = (w * np.exp(2j * np.pi * reps * e_diag)) @ w.conj().T
                if side == "a":
                    alpha_tau = u_end @ state.alpha
                else:
                    alpha_tau = state.alpha @ u_end.T
                report = topology.check_cyclic(state, qstate.TwoQuditState.from_matrix(alpha_tau))
                defect = topology.quantization_defect(report.delta_phi, d)
                max_defect = max(max_defect, defect)
                _check(
                    report.cyclic and report.class_n == reps % d,
                    f"audit-quantization d={d} trial={t}: class {report.class_n} != {reps % d}",
                )
                lines.append(
                    f"d={d} trial={t} kind={kind} side={side} reps={reps} "
                    f"defect={defect:.12g} {report.to_line()}"
                )
        singular = qstate.make_state(d, "product")
        u_end = np.diag(np.exp(2j * np.pi * e_diag))
        report = topology.check_cyclic(
            singular, qstate.TwoQuditState.from_matrix(u_end @ singular.alpha)
        )
        _check(
            report.cyclic and report.class_n is None,
            f"audit-quantization d={d}: singular state was not withheld",
        )
        lines.append(f"d={d} trial=singular kind=vn side=a reps=1 defect=na {report.to_line()}")
    _check(max_defect <= 1e-8, f"audit-quantization: lattice distance {max_defect:.3g} > 1e-8")
    lines.append(f"summary max_defect={max_defect:.12g}")
    dest = outdir / "audit_quantization.txt"
    _write_lines(dest, lines)
    return dest


def run_dyn_vanishing(d_list=(2, 3, 4), trials=50, seed=0, outdir="out", samples=501):
    """Random local paths on maximally entangled states: the dynamical
    phase must vanish identically; a product-state control must not."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = []
    worst_integrand = 0.0
    worst_phase = 0.0
    for d in d_list:
        maxent = qstate.make_state(d, "max_entangled")
        rngs = _trial_rngs(seed + 17 * d, trials)
        control = 0.0
        for t, rng in enumerate(rngs):
            path = evolution.random_su_path(d, rng, n=samples)
            trace = evolution.compute_phase_trace(maxent, path)
            rho_b = qstate.reduced_density(maxent, "B")
            rho_a = qstate.reduced_density(maxent, "A")
            integrand = backend.kernels.dyn_integrand_series(rho_b, path.ha, rho_a, path.hb)
            peak_i = float(np.abs(integrand).max())
            peak_p = float(np.abs(trace.phi_dyn).max())
            worst_integrand = max(worst_integrand, peak_i)
            worst_phase = max(worst_phase, peak_p)
            lines.append(
                f"d={d} trial={t} max_integrand={peak_i:.12g} max_phi_dyn={peak_p:.12g}"
            )
            if t == 0:
                product = qstate.make_state(d, "product")
                ctrace = evolution.compute_phase_trace(product, path)
                control = float(np.abs(ctrace.phi_dyn).max())
                lines.append(f"d={d} control_product max_phi_dyn={control:.12g}")
        _check(control > 1e-3, f"dyn-vanishing d={d}: product-state control too small")
    _check(worst_integrand <= 1e-12, f"dyn-vanishing: integrand peak {worst_integrand:.3g}")
    _check(worst_phase <= 1e-9, f"dyn-vanishing: dynamical phase peak {worst_phase:.3g}")
    lines.append(
        f"summary max_integrand={worst_integrand:.12g} max_phi_dyn={worst_phase:.12g} pass=1"
    )
    dest = outdir / "dyn_vanishing.txt"
    _write_lines(dest, lines)
    return dest


def run_evolve(path_kind="vn", d=3, concurrence=None, chi_end=TWO_PI, theta=0.0,
               zeta=TWO_PI, samples=2001, state_file=None, outdir="out"):
    """Generic runner: build (state, path), write the trace CSV and print
    the endpoint cycle record."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if state_file is not None:
        state = qstate.load_state(state_file)
        d = state.dim
        family = "file"
    elif path_kind == "vn" and concurrence is not None:
        c_lo, _ = qstate.vn_admissible_range(d)
        if concurrence >= c_lo - 1e-12:
            state = qstate.vn_aligned_state(d, concurrence)
            family = "aligned"
        else:
            state = qstate.make_state(d, "concurrence_target", target=concurrence)
            family = "schmidt-split"
    elif concurrence is not None:
        state = qstate.make_state(d, "concurrence_target", target=concurrence)
        family = "schmidt-split"
    else:
        state = qstate.make_state(d, "max_entangled")
        family = "max-entangled"
    if path_kind == "vn":
        path = evolution.vn_path(d, chi=chi_end, n=samples)
    elif path_kind == "euler":
        if d != 2:
            raise PropertyViolation("euler paths are defined for d = 2")
        path = evolution.qubit_euler_path(theta, 0.0, chi_end, n=samples)
    elif path_kind == "piecewise":
        if d != 3:
            raise PropertyViolation("the kinked path is defined for d = 3")
        path = evolution.qutrit_piecewise_path(zeta=zeta, chi=chi_end, n=samples)
    else:
        raise ValueError(f"unknown path kind {path_kind!r}")
    trace = evolution.compute_phase_trace(state, path)
    dest = outdir / f"evolve_{path_kind}.csv"
    evolution.write_phase_trace_csv(trace, dest)
    report = topology.check_cyclic(state, evolution.evolve(state, path, path.n - 1))
    print(f"state_family={family} {report.to_line()}")
    return dest, report


# ---------------------------------------------------------------------------
# configuration and argument handling


def parse_config(path):
    """Flat key=value file; '#' starts a comment; keys mirror the flags."""
    values = {}
    for raw in Path(path).read_text(encoding="ascii").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _floats(text):
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _ints(text):
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


def _build_parser():
    parser = _Parser(prog="quditphase", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    shared = [
        (("--d",), dict(type=int, default=None, help="qudit dimension")),
        (("--concurrence",), dict(type=str, default=None, help="value or comma list")),
        (("--samples",), dict(type=int, default=None, help="odd grid size >= 101")),
        (("--seed",), dict(type=int, default=None, help="audit seed (default 0)")),
        (("--zeta",), dict(type=float, default=None, help="kinked-path angle (rad)")),
        (("--theta",), dict(type=float, default=None, help="polar angle (rad)")),
        (("--out",), dict(type=str, default=None, help="output directory")),
        (("--config",), dict(type=str, default=None, help="key=value file")),
    ]
    names = ("fig1", "fig2a", "fig2b", "audit-quantization", "dyn-vanishing", "evolve")
    commands = {}
    for name in names:
        cmd = sub.add_parser(name)
        for flags, kwargs in shared:
            cmd.add_argument(*flags, **kwargs)
        commands[name] = cmd
    commands["audit-quantization"].add_argument("--trials", type=int, default=None)
    commands["dyn-vanishing"].add_argument("--trials", type=int, default=None)
    commands["evolve"].add_argument("--path", type=str, default=None,
                                    choices=("vn", "euler", "piecewise"))
    commands["evolve"].add_argument("--chi-end", type=float, default=None)
    commands["evolve"].add_argument("--state", type=str, default=None)
    return parser


def _merged(args):
    """Config-file values with CLI flags taking precedence."""
    values = {}
    if args.config:
        values.update(parse_config(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            values[key] = val
    return values


def _get(values, key, cast, default):
    if key not in values or values[key] is None:
        return default
    return cast(values[key])


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    values = _merged(args)
    out = _get(values, "out", str, "out")
    samples = _get(values, "samples", int, 2001)
    seed = _get(values, "seed", int, 0)
    try:
        if args.command == "fig1":
            run_fig1(
                concurrences=_get(values, "concurrence", _floats, FIG1_CONCURRENCES),
                theta=_get(values, "theta", float, 0.0),
                samples=samples,
                outdir=out,
            )
        elif args.command in ("fig2a", "fig2b"):
            run_fig2(
                variant=args.command[-1],
                zeta=_get(values, "zeta", float, TWO_PI),
                samples=samples,
                outdir=out,
            )
        elif args.command == "audit-quantization":
            run_audit_quantization(
                d_list=_get(values, "d", lambda v: _ints(v), (2, 3, 5)),
                trials=_get(values, "trials", int, 100),
                seed=seed,
                outdir=out,
            )
        elif args.command == "dyn-vanishing":
            run_dyn_vanishing(
                d_list=_get(values, "d", lambda v: _ints(v), (2, 3, 4)),
                trials=_get(values, "trials", int, 50),
                seed=seed,
                outdir=out,
                samples=_get(values, "samples", int, 501),
            )
        elif args.command == "evolve":
            conc = _get(values, "concurrence", float, None)
            run_evolve(
                path_kind=_get(values, "path", str, "vn"),
                d=_get(values, "d", int, 3),
                concurrence=conc,
                chi_end=_get(values, "chi_end", float, TWO_PI),
                theta=_get(values, "theta", float, 0.0),
                zeta=_get(values, "zeta", float, TWO_PI),
                samples=samples,
                state_file=_get(values, "state", str, None),
                outdir=out,
            )
    except (PropertyViolation, NotQuantized) as exc:
        print(f"property violated: {exc}", file=sys.stderr)
        return 2
    except (QuditPhaseError, ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
