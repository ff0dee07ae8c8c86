"""Command-line interface.

Subcommands: ``check``, ``optimize``, ``simulate {ramsey,hahn}``,
``filter``, ``bloch``, ``info``. Exit codes follow tooling convention:
0 on success, 1 on usage or input-parse errors, 2 on a domain-negative
outcome (system not universal, fidelity goal missed) so that CI can tell
"no" apart from "broken".

Every command that writes artifacts also writes a JSON run manifest next to
its primary output (command line, tool version, input/output hashes, seed)
so a run can be reproduced bit-for-bit. Files are written atomically.
All output paths resolve relative to $SPINGATE_OUTDIR when that is set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_system, resolve_config
from .controllability import build_control_graph, graph_edge_list, is_universal
from .experiments import (
    ExperimentTrace,
    bloch_projection,
    dominant_frequency,
    hahn_experiment,
    ramsey_experiment,
    thermal_state,
)
from .grape import GrapeConfig, grape_optimize, random_pulse
from .operators import subspace_rotation
from .pulses import gate_fidelity, propagate, q_filter, read_pulse_file, serialize_pulse
from .spinsys import (
    SpinSystem,
    default_carrier_mhz,
    quantization_axes,
    system_eigensystem,
    transition_table,
)
from .targets import NAMED_TARGETS, named_target

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        raise UsageError(message)


def _out_path(raw: str) -> Path:
    base = os.environ.get("SPINGATE_OUTDIR")
    p = Path(raw)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(command: str, argv: list[str], inputs: list[Path],
                    outputs: list[Path], seed: int | None = None) -> Path:
    primary = outputs[0]
    manifest = {
        "command": command,
        "argv": argv,
        "tool": "spingate",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": {str(p): _sha256(Path(p)) for p in outputs},
    }
    path = primary.with_name(primary.name + ".manifest.json")
    _atomic_write(path, json.dumps(manifest, indent=2) + "\n")
    return path


def _load(config_arg: str) -> tuple[SpinSystem, Path]:
    path = resolve_config(config_arg)
    return load_system(path), path


def _parse_transition(text: str) -> tuple[int, int]:
    try:
        j, k = (int(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"transition must look like '1,4', got {text!r}") from None
    return j, k


def _trace_csv(trace: ExperimentTrace) -> str:
    lines = ["tau_ns,signal"]
    for t, s in zip(trace.tau_us, trace.signal):
        lines.append(f"{t * 1e3:.6f},{s:.12e}")
    return "\n".join(lines) + "\n"


def _plot_description(title: str, csv_path: Path, x: str, y: str) -> str:
    return (f"plot: line\ntitle: {title}\nxlabel: {x}\nylabel: {y}\n"
            f"data: {csv_path}\nx: {x}\ny: {y}\n")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args, argv) -> int:
    sys_, cfg_path = _load(args.config)
    verdict = is_universal(sys_, tol_mhz=args.tol_mhz, threshold_rel=args.threshold)
    print(f"system: {cfg_path} (dim {sys_.dim})")
    print(f"strongly regular: {verdict.strongly_regular}")
    print(f"control graph connected: {verdict.connected}")
    print(f"universal: {verdict.universal}")
    for v in verdict.violations:
        print(f"  violation: {v}")
    if args.export_graph:
        graph = build_control_graph(system_eigensystem(sys_), args.threshold)
        out = _out_path(args.export_graph)
        _atomic_write(out, graph_edge_list(graph))
        _write_manifest("check", argv, [cfg_path], [out])
        print(f"graph written to {out}")
    return EXIT_OK if verdict.universal else EXIT_NEGATIVE


def _resolve_target(sys_: SpinSystem, name: str) -> np.ndarray:
    if name in NAMED_TARGETS:
        return named_target(sys_, name)
    path = Path(name)
    if path.is_file():
        mat = np.loadtxt(path, dtype=complex)
        if mat.shape != (sys_.dim, sys_.dim):
            raise ValueError(f"target matrix in {path} has shape {mat.shape}, "
                             f"system needs {(sys_.dim, sys_.dim)}")
        return mat
    known = ", ".join(sorted(NAMED_TARGETS))
    raise ValueError(f"unknown target {name!r}: not a file and not one of {known}")


def cmd_optimize(args, argv) -> int:
    sys_, cfg_path = _load(args.config)
    target = _resolve_target(sys_, args.target)
    carrier = args.carrier if args.carrier is not None else default_carrier_mhz(sys_)
    phase_enabled = {"on": True, "off": False,
                     "auto": args.target == "cnot_hc"}[args.phase]

    rng = np.random.default_rng(args.seed)
    init = random_pulse(rng, carrier, args.max_rabi, args.slices, args.slice_ns,
                        phase_enabled)
    cfg = GrapeConfig(
        target=target,
        max_iterations=args.max_iter,
        seed=args.seed,
        restarts=args.restarts,
        amplitude_rise_penalty=args.penalty,
        fidelity_goal=args.goal,
    )
    report = grape_optimize(sys_, cfg, init)

    stem = args.target if args.target in NAMED_TARGETS else "custom"
    out_pulse = _out_path(args.out or f"{stem}.pulse")
    out_trace = _out_path(args.trace_csv or f"{stem}_trace.csv")
    _atomic_write(out_pulse, serialize_pulse(report.final_pulse))
    rows = ["iteration,fidelity"]
    rows += [f"{i},{f:.12e}" for i, f in enumerate(report.fidelity_trace)]
    _atomic_write(out_trace, "\n".join(rows) + "\n")
    _write_manifest("optimize", argv, [cfg_path], [out_pulse, out_trace],
                    seed=args.seed)

    print(f"carrier: {carrier:.6f} MHz, max Rabi: {args.max_rabi} MHz, "
          f"{args.slices} x {args.slice_ns} ns slices, phase "
          f"{'on' if phase_enabled else 'off'}")
    print(f"restart fidelities: "
          + ", ".join(f"{f:.6f}" for f in report.restart_fidelities))
    print(f"final fidelity: {report.final_fidelity:.6f} "
          f"(goal {args.goal}, {report.iterations_used} iterations)")
    print(f"pulse written to {out_pulse}")
    print(f"fidelity trace written to {out_trace}")
    return EXIT_OK if report.final_fidelity >= args.goal else EXIT_NEGATIVE


def cmd_simulate(args, argv) -> int:
    sys_, cfg_path = _load(args.config)
    transition = _parse_transition(args.transition)
    n = max(2, int(round(args.tau_max_ns / args.tau_step_ns)))
    taus_us = np.arange(n) * args.tau_step_ns * 1e-3

    inputs = [cfg_path]
    if args.ideal:
        pc = named_target(sys_, "u_pc")
        pc_inv = pc.conj().T
        refocus = named_target(sys_, "u_r") if args.kind == "hahn" else None
    else:
        if not args.pulse_pc:
            raise UsageError("either --ideal or --pulse-pc is required")
        pc_path = Path(args.pulse_pc)
        pc = read_pulse_file(pc_path)
        inputs.append(pc_path)
        if args.pulse_pc_inv:
            inv_path = Path(args.pulse_pc_inv)
            pc_inv = read_pulse_file(inv_path)
            inputs.append(inv_path)
        else:
            pc_inv = None  # adjoint of the propagated pulse
        refocus = None
        if args.kind == "hahn":
            if not args.pulse_r:
                raise UsageError("hahn with pulses needs --pulse-r "
                                 "(or use --ideal)")
            r_path = Path(args.pulse_r)
            refocus = read_pulse_file(r_path)
            inputs.append(r_path)

    if args.kind == "ramsey":
        trace = ramsey_experiment(sys_, pc, pc_inv, taus_us, transition)
    else:
        trace = hahn_experiment(sys_, pc, refocus, pc_inv, taus_us, transition)

    out_csv = _out_path(args.out or f"{args.kind}.csv")
    _atomic_write(out_csv, _trace_csv(trace))
    outputs = [out_csv]
    if args.plot:
        plot_path = _out_path(args.plot)
        title = f"{args.kind} scan ({'ideal gates' if args.ideal else 'pulses'})"
        _atomic_write(plot_path, _plot_description(title, out_csv, "tau_ns", "signal"))
        outputs.append(plot_path)
    if args.plot_png:
        png_path = _out_path(args.plot_png)
        _render_png(trace, args.kind, png_path)
        outputs.append(png_path)
    _write_manifest(f"simulate {args.kind}", argv, inputs, outputs)

    print(f"trace written to {out_csv} ({len(trace.signal)} points)")
    if args.report_frequency:
        try:
            freq = dominant_frequency(trace)
            print(f"dominant frequency: {freq:.4f} MHz")
        except ValueError as exc:
            print(f"dominant frequency: none ({exc})")
    return EXIT_OK


def _render_png(trace: ExperimentTrace, kind: str, path: Path) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise RuntimeError("matplotlib is required for --plot-png "
                           "(pip install spingate[plot])") from None
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(trace.tau_us * 1e3, trace.signal, marker=".", lw=1)
    ax.set_xlabel("tau (ns)")
    ax.set_ylabel("echo signal")
    ax.set_title(f"{kind} scan")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_filter(args, argv) -> int:
    pulse_path = Path(args.pulse)
    pulse = read_pulse_file(pulse_path)
    filtered = q_filter(pulse, args.q, args.center)

    half_width = args.center / (2.0 * args.q)
    if pulse.total_duration_us > 0:
        resolution = 1.0 / pulse.total_duration_us
        if half_width < resolution:
            print(f"warning: resonator half-width {half_width:.4f} MHz is below "
                  f"the pulse spectral resolution {resolution:.4f} MHz; "
                  f"only the DC component passes unattenuated")

    out = _out_path(args.out or (pulse_path.stem + "_filtered.pulse"))
    _atomic_write(out, serialize_pulse(filtered))
    inputs = [pulse_path]
    print(f"half-width: {half_width:.4f} MHz (Q={args.q}, f0={args.center} MHz)")
    if args.config and args.target:
        sys_, cfg_path = _load(args.config)
        inputs.append(cfg_path)
        target = _resolve_target(sys_, args.target)
        f_pre = gate_fidelity(propagate(pulse, sys_), target)
        f_post = gate_fidelity(propagate(filtered, sys_), target)
        print(f"fidelity before filter: {f_pre:.6f}")
        print(f"fidelity after filter:  {f_post:.6f}")
    _write_manifest("filter", argv, inputs, [out])
    print(f"filtered pulse written to {out}")
    return EXIT_OK


def cmd_bloch(args, argv) -> int:
    sys_, cfg_path = _load(args.config)
    pairs = [_parse_transition(p) for p in args.pairs.split("/")]
    rho = thermal_state(sys_)
    rows = ["step,time_us,pair,x,y,z"]
    inputs = [cfg_path]

    def record(step: int, t_us: float, rho_now: np.ndarray) -> None:
        for pair in pairs:
            x, y, z = bloch_projection(rho_now, pair)
            rows.append(f"{step},{t_us:.6f},{pair[0]}-{pair[1]},"
                        f"{x:.12e},{y:.12e},{z:.12e}")

    if args.pulse:
        pulse_path = Path(args.pulse)
        pulse = read_pulse_file(pulse_path)
        inputs.append(pulse_path)
        from .pulses import PulseSequence  # local alias for slicing
        t = 0.0
        record(0, t, rho)
        for i, sl in enumerate(pulse.slices, start=1):
            u = propagate(PulseSequence(pulse.carrier_freq_mhz, pulse.max_rabi_mhz,
                                        (sl,), pulse.phase_enabled), sys_)
            rho = u @ rho @ u.conj().T
            t += sl[0]
            record(i, t, rho)
    else:
        # Ideal polarization transfer then coherence creation, subdivided so
        # the trajectory is visible.
        n = args.steps
        step = 0
        record(step, float("nan"), rho)
        for (j, k, theta) in ((2, 4, np.pi), (1, 2, np.pi / 2)):
            u = subspace_rotation(sys_.dim, j, k, theta / n, "x")
            for _ in range(n):
                rho = u @ rho @ u.conj().T
                step += 1
                record(step, float("nan"), rho)

    out = _out_path(args.out or "bloch.csv")
    _atomic_write(out, "\n".join(rows) + "\n")
    _write_manifest("bloch", argv, inputs, [out])
    print(f"trajectories written to {out}")
    return EXIT_OK


def cmd_info(args, argv) -> int:
    sys_, cfg_path = _load(args.config)
    eigs = system_eigensystem(sys_)
    print(f"config: {cfg_path}")
    print(f"dimension: {sys_.dim} (1 electron + {sys_.n_nuclei} nuclei)")
    print(f"electron frequency: {sys_.electron_freq_mhz:.6f} MHz")
    for i, nuc in enumerate(sys_.nuclei, start=1):
        axes = quantization_axes(sys_, i)
        print(f"nucleus {i}: zeeman {nuc.zeeman_freq_mhz} MHz, hyperfine row "
              f"({nuc.a_zx_mhz}, {nuc.a_zy_mhz}, {nuc.a_zz_mhz}) MHz, "
              f"axes angle {np.degrees(axes.angle_rad):.2f} deg")
    print("levels (label, energy MHz, electron manifold):")
    for lvl in range(1, sys_.dim + 1):
        ms = eigs.level_manifold[lvl - 1]
        arrow = "up" if ms > 0 else "down"
        print(f"  {lvl:3d}  {eigs.level_energies_mhz[lvl - 1]:+.6f}  {arrow}")
    print("transitions (j-k, MHz, |<k|S_x|j>|):")
    for j, k, freq, elem in transition_table(eigs):
        print(f"  {j}-{k}  {freq:14.6f}  {elem:.6f}")
    print(f"default carrier: {default_carrier_mhz(sys_):.6f} MHz")
    verdict = is_universal(sys_)
    print(f"universal: {verdict.universal}")
    for v in verdict.violations:
        print(f"  violation: {v}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="spingate",
                     description="Electron-nuclear spin control toolkit")
    parser.add_argument("--version", action="version",
                        version=f"spingate {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="decide universal controllability")
    p.add_argument("config", help="config file path or builtin name")
    p.add_argument("--tol-mhz", type=float, default=1e-6,
                   help="degeneracy tolerance (MHz)")
    p.add_argument("--threshold", type=float, default=1e-8,
                   help="relative S_x matrix-element cutoff for graph edges")
    p.add_argument("--export-graph", metavar="PATH",
                   help="write the control graph as a DOT edge list")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", help="GRAPE pulse synthesis for a target gate")
    p.add_argument("config")
    p.add_argument("--target", required=True,
                   help=f"named target ({', '.join(sorted(NAMED_TARGETS))}) "
                        f"or a matrix file")
    p.add_argument("--slices", type=int, default=200)
    p.add_argument("--slice-ns", type=float, default=4.0)
    p.add_argument("--goal", type=float, default=0.98)
    p.add_argument("--max-rabi", type=float, default=7.0, help="MHz")
    p.add_argument("--carrier", type=float, default=None,
                   help="carrier (MHz); default: level 1 to top-level transition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--phase", choices=("auto", "on", "off"), default="auto",
                   help="phase modulation (auto: on for cnot_hc only)")
    p.add_argument("--penalty", type=float, default=0.0,
                   help="slice-to-slice amplitude rise penalty weight")
    p.add_argument("--out", help="pulse file (default <target>.pulse)")
    p.add_argument("--trace-csv", help="fidelity trace CSV")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="run a Ramsey or Hahn scan")
    p.add_argument("kind", choices=("ramsey", "hahn"))
    p.add_argument("config")
    p.add_argument("--ideal", action="store_true",
                   help="use exact gate unitaries instead of pulse files")
    p.add_argument("--pulse-pc", help="optimized u_pc pulse file")
    p.add_argument("--pulse-pc-inv", help="optimized inverse pulse file "
                                          "(default: adjoint of --pulse-pc)")
    p.add_argument("--pulse-r", help="optimized refocusing pulse (hahn)")
    p.add_argument("--tau-max-ns", type=float, default=1280.0)
    p.add_argument("--tau-step-ns", type=float, default=10.0)
    p.add_argument("--transition", default="1,4", help="monitored pair, e.g. 1,4")
    p.add_argument("--out", help="CSV output (default <kind>.csv)")
    p.add_argument("--plot", help="write plot-description text file")
    p.add_argument("--plot-png", help="render PNG (needs matplotlib)")
    p.add_argument("--report-frequency", action="store_true",
                   help="print the dominant FFT peak of the trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="apply the resonator Q bandwidth filter")
    p.add_argument("pulse", help="pulse file")
    p.add_argument("--q", type=float, required=True, help="resonator quality factor")
    p.add_argument("--center", type=float, required=True,
                   help="resonator center frequency (MHz)")
    p.add_argument("--out", help="filtered pulse file")
    p.add_argument("--config", help="system config for the fidelity report")
    p.add_argument("--target", help="target gate for the fidelity report")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("bloch", help="dump Bloch-sphere trajectories of the "
                                     "polarization-transfer sequence")
    p.add_argument("config")
    p.add_argument("--pulse", help="waveform to trace (default: ideal gates)")
    p.add_argument("--pairs", default="1,2/1,4/3,4",
                   help="level pairs to project, e.g. 1,2/1,4/3,4")
    p.add_argument("--steps", type=int, default=30,
                   help="substeps per ideal gate")
    p.add_argument("--out", help="CSV output (default bloch.csv)")
    p.set_defaults(func=cmd_bloch)

    p = sub.add_parser("info", help="print system summary")
    p.add_argument("config")
    p.set_defaults(func=cmd_info)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
