"""Simulated pulse-sequence experiments on deviation density matrices.

Everything acts in the labeled-level basis of the secular Hamiltonian. The
thermal state is the traceless deviation density -S_z; signals are linear
in it. Free evolution happens in the rotating frame of the working carrier,
which leaves populations and intra-manifold coherences (the quantities
observed here) untouched.

The standard sequences:

* Ramsey: U_pc, free evolution tau, U_pc^-1, then the population
  difference across a monitored electron transition. The signal oscillates
  at the nuclear splitting of the manifold where U_pc created coherence.
* Hahn: same with a refocusing pi rotation U_r inserted at tau/2, which
  unwinds the acquired phase; with perfect gates the signal is flat in tau.

Readout is the population-difference observable by default. A closed system
has no detection artifacts, so simulating the detection subsequence adds
nothing; an optional mode runs the two unmodulated detection pulses anyway
for completeness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .operators import pair_sigma
from .pulses import PulseSequence, control_frame, propagate, uniform_pulse
from .spinsys import SpinSystem, default_carrier_mhz, system_eigensystem

GateLike = Union[np.ndarray, PulseSequence]

PURITY_TOL = 1e-10

# Default Ramsey grid: 10 ns steps to 1.28 us; resolves fringes up to 50 MHz.
DEFAULT_TAU_US = tuple(np.arange(128) * 0.010)


@dataclass(frozen=True)
class Gate:
    unitary: np.ndarray


@dataclass(frozen=True)
class Pulse:
    sequence: PulseSequence


@dataclass(frozen=True)
class Delay:
    duration_us: float


@dataclass(frozen=True)
class SweptDelay:
    """Placeholder for the swept free-evolution time; ``fraction`` of the
    swept value is spent here (0.5 on each side of a refocusing pulse)."""

    fraction: float = 1.0


ScheduleElement = Union[Gate, Pulse, Delay, SweptDelay]


@dataclass(frozen=True)
class Schedule:
    """Ordered pulse/delay program with at most one swept delay (possibly
    split into fractions that must sum to 1)."""

    elements: tuple[ScheduleElement, ...]
    carrier_freq_mhz: float

    def __post_init__(self):
        fractions = [e.fraction for e in self.elements if isinstance(e, SweptDelay)]
        if fractions and abs(sum(fractions) - 1.0) > 1e-12:
            raise ValueError("swept-delay fractions must sum to 1")

    @property
    def swept(self) -> bool:
        return any(isinstance(e, SweptDelay) for e in self.elements)


def thermal_state(sys: SpinSystem) -> np.ndarray:
    """Deviation density at thermal equilibrium, -S_z, in the level basis.

    Diagonal with +1/2 on the (more populated) m_s = -1/2 levels and -1/2 on
    the m_s = +1/2 levels; traceless, no net nuclear polarization.
    """
    eigs = system_eigensystem(sys)
    return np.diag(-eigs.level_manifold).astype(complex)


def resolve_gate(gate: GateLike, sys: SpinSystem) -> np.ndarray:
    """Unitary of an ideal gate matrix or an optimized pulse sequence."""
    if isinstance(gate, PulseSequence):
        return propagate(gate, sys)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (sys.dim, sys.dim):
        raise ValueError("gate dimension does not match the system")
    return gate


def evolve(rho: np.ndarray, schedule: Schedule, sys: SpinSystem,
           tau_us: float | None = None) -> np.ndarray:
    """Propagate a density matrix through a schedule.

    ``tau_us`` supplies the swept delay when the schedule contains one.
    Unitary evolution: Hermiticity, trace and purity are preserved (checked
    to 1e-10).
    """
    if schedule.swept and tau_us is None:
        raise ValueError("schedule sweeps a delay; tau_us is required")
    frame = control_frame(sys, schedule.carrier_freq_mhz)
    purity_in = float(np.real(np.trace(rho @ rho)))
    out = np.array(rho, dtype=complex)
    for element in schedule.elements:
        if isinstance(element, Gate):
            u = element.unitary
        elif isinstance(element, Pulse):
            u = propagate(element.sequence, sys)
        elif isinstance(element, Delay):
            u = frame.free_propagator(element.duration_us)
        elif isinstance(element, SweptDelay):
            u = frame.free_propagator(element.fraction * tau_us)
        else:
            raise TypeError(f"unknown schedule element {element!r}")
        out = u @ out @ u.conj().T
    purity_out = float(np.real(np.trace(out @ out)))
    if abs(purity_out - purity_in) > PURITY_TOL * max(1.0, abs(purity_in)):
        raise FloatingPointError("purity drifted during evolution")
    return out


def echo_signal(rho: np.ndarray, transition: tuple[int, int] = (1, 4)) -> float:
    """Population difference Tr(rho sigma_z^{jk}) across the monitored
    electron transition; proxies the electron spin-echo height."""
    j, k = transition
    return float(np.real(np.trace(rho @ pair_sigma(rho.shape[0], j, k, "z"))))


def bloch_projection(rho: np.ndarray, pair: tuple[int, int]) -> np.ndarray:
    """(x, y, z) Bloch vector of the two-level subspace ``pair``."""
    j, k = pair
    d = rho.shape[0]
    return np.array([
        float(np.real(np.trace(rho @ pair_sigma(d, j, k, ax))))
        for ax in ("x", "y", "z")
    ])


@dataclass(frozen=True)
class ExperimentTrace:
    """(tau, signal) series of a simulated experiment."""

    tau_us: np.ndarray
    signal: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tau_us", np.asarray(self.tau_us, dtype=float))
        object.__setattr__(self, "signal", np.asarray(self.signal, dtype=float))
        if self.tau_us.shape != self.signal.shape:
            raise ValueError("tau and signal must have the same length")


def _carrier_for(sys: SpinSystem, gates: list[GateLike],
                 carrier_freq_mhz: float | None) -> float:
    carriers = {g.carrier_freq_mhz for g in gates if isinstance(g, PulseSequence)}
    if len(carriers) > 1:
        raise ValueError("all pulses in one experiment must share a carrier")
    if carriers:
        carrier = carriers.pop()
        if carrier_freq_mhz is not None and abs(carrier - carrier_freq_mhz) > 1e-9:
            raise ValueError("explicit carrier disagrees with the pulses")
        return carrier
    return default_carrier_mhz(sys) if carrier_freq_mhz is None else carrier_freq_mhz


def _sweep(sys: SpinSystem, schedule: Schedule, rho0: np.ndarray,
           tau_us, transition: tuple[int, int], meta: dict) -> ExperimentTrace:
    taus = np.asarray(tau_us, dtype=float)
    signal = np.array([
        echo_signal(evolve(rho0, schedule, sys, tau_us=float(t)), transition)
        for t in taus
    ])
    return ExperimentTrace(tau_us=taus, signal=signal, meta=meta)


def ramsey_experiment(sys: SpinSystem, pc: GateLike, pc_inv: GateLike | None = None,
                      tau_us=DEFAULT_TAU_US, transition: tuple[int, int] = (1, 4),
                      carrier_freq_mhz: float | None = None) -> ExperimentTrace:
    """Ramsey fringe scan: pc, free(tau), pc_inv, echo readout.

    ``pc``/``pc_inv`` may be ideal unitaries or optimized pulse sequences;
    a missing ``pc_inv`` defaults to the adjoint of the resolved ``pc``.
    """
    gates = [g for g in (pc, pc_inv) if g is not None]
    carrier = _carrier_for(sys, gates, carrier_freq_mhz)
    u_pc = resolve_gate(pc, sys)
    u_inv = u_pc.conj().T if pc_inv is None else resolve_gate(pc_inv, sys)
    schedule = Schedule((Gate(u_pc), SweptDelay(), Gate(u_inv)), carrier)
    meta = {"experiment": "ramsey", "transition": transition,
            "carrier_freq_mhz": carrier}
    return _sweep(sys, schedule, thermal_state(sys), tau_us, transition, meta)


def hahn_experiment(sys: SpinSystem, pc: GateLike, refocus: GateLike,
                    pc_inv: GateLike | None = None, tau_us=DEFAULT_TAU_US,
                    transition: tuple[int, int] = (1, 4),
                    carrier_freq_mhz: float | None = None) -> ExperimentTrace:
    """Hahn echo scan: pc, free(tau/2), refocus, free(tau/2), pc_inv."""
    gates = [g for g in (pc, refocus, pc_inv) if g is not None]
    carrier = _carrier_for(sys, gates, carrier_freq_mhz)
    u_pc = resolve_gate(pc, sys)
    u_r = resolve_gate(refocus, sys)
    u_inv = u_pc.conj().T if pc_inv is None else resolve_gate(pc_inv, sys)
    schedule = Schedule(
        (Gate(u_pc), SweptDelay(0.5), Gate(u_r), SweptDelay(0.5), Gate(u_inv)),
        carrier)
    meta = {"experiment": "hahn", "transition": transition,
            "carrier_freq_mhz": carrier}
    return _sweep(sys, schedule, thermal_state(sys), tau_us, transition, meta)


def detection_echo_signal(rho: np.ndarray, sys: SpinSystem,
                          transition: tuple[int, int] = (1, 4),
                          max_rabi_mhz: float = 7.0,
                          delay_us: float = 0.2,
                          carrier_freq_mhz: float | None = None) -> float:
    """Optional explicit detection: two unmodulated (square, full-amplitude)
    pulses pi/2 -- delay -- pi -- delay, then the transverse coherence
    magnitude on the monitored pair at the echo time.
    """
    carrier = default_carrier_mhz(sys) if carrier_freq_mhz is None else carrier_freq_mhz
    frame = control_frame(sys, carrier)
    t_90 = 1e3 / (4.0 * max_rabi_mhz)  # ns
    out = np.array(rho, dtype=complex)
    for dur_ns in (t_90, None, 2 * t_90, None):
        if dur_ns is None:
            u = frame.free_propagator(delay_us)
        else:
            u = propagate(uniform_pulse(carrier, max_rabi_mhz, [1.0], dur_ns), sys)
        out = u @ out @ u.conj().T
    x, y, _ = bloch_projection(out, transition)
    return float(np.hypot(x, y))


def dominant_frequency(trace: ExperimentTrace) -> float:
    """Location (MHz) of the largest non-DC FFT magnitude peak, refined by
    parabolic interpolation between bins. Requires a uniform tau grid."""
    taus, signal = trace.tau_us, trace.signal
    if taus.size < 4:
        raise ValueError("need at least 4 samples")
    steps = np.diff(taus)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15):
        raise ValueError("dominant_frequency requires a uniform tau grid")
    dt = float(steps[0])

    spectrum = np.abs(np.fft.rfft(signal - np.mean(signal)))
    spectrum[0] = 0.0
    peak = int(np.argmax(spectrum))
    if spectrum[peak] <= 1e-12 * max(1.0, float(np.max(np.abs(signal)))) * signal.size:
        raise ValueError("no non-DC peak in the trace")
    df = 1.0 / (dt * signal.size)
    if 1 <= peak < spectrum.size - 1:
        a, b, c = spectrum[peak - 1], spectrum[peak], spectrum[peak + 1]
        denom = a - 2 * b + c
        shift = 0.0 if denom == 0.0 else 0.5 * (a - c) / denom
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return (peak + shift) * df
