"""Piecewise-constant microwave control sequences and their propagators.

The drive is a microwave field at carrier frequency Omega near the electron
resonance, with envelope amplitude a(t) in [-1, 1] (units of the maximum
Rabi frequency) and optional phase phi(t). In the frame co-rotating with the
carrier about S_z the secular Hamiltonian is unchanged apart from the offset
-2*pi*Omega*S_z (exact, since the secular Hamiltonian commutes with S_z) and
the drive becomes time-independent within a slice::

    H_slice = H_0 - 2pi Omega S_z + 2pi w1 a (cos(phi) S_x + sin(phi) S_y)

Propagation happens in the labeled-level basis, where free evolution is
diagonal and gate targets built from level-subspace rotations apply
directly. Each slice propagator is computed by exact eigendecomposition,
which also yields exact fidelity gradients for the optimizer.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .operators import build_operators, unitarity_defect
from .spinsys import SpinSystem, TWO_PI, build_secular_hamiltonian, system_eigensystem

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class PulseSequence:
    """Piecewise-constant control sequence.

    ``slices`` holds (duration_us, amplitude, phase_rad) triples; amplitude
    is in units of ``max_rabi_mhz`` and must stay within [-1, 1]. Slice 1
    acts first in time.
    """

    carrier_freq_mhz: float
    max_rabi_mhz: float
    slices: tuple[tuple[float, float, float], ...] = ()
    phase_enabled: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "slices",
            tuple((float(d), float(a), float(p)) for d, a, p in self.slices))
        arr = np.array(self.slices, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(arr)):
            raise ValueError("pulse slices must be finite")
        if arr.size and np.any(arr[:, 0] <= 0.0):
            raise ValueError("slice durations must be positive")
        if arr.size and np.any(np.abs(arr[:, 1]) > 1.0 + 1e-12):
            raise ValueError("slice amplitudes must lie in [-1, 1]")
        if self.max_rabi_mhz < 0.0 or self.carrier_freq_mhz < 0.0:
            raise ValueError("carrier and max Rabi frequencies must be non-negative")

    @property
    def n_slices(self) -> int:
        return len(self.slices)

    @property
    def durations_us(self) -> np.ndarray:
        return np.array([s[0] for s in self.slices], dtype=float)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([s[1] for s in self.slices], dtype=float)

    @property
    def phases(self) -> np.ndarray:
        return np.array([s[2] for s in self.slices], dtype=float)

    @property
    def total_duration_us(self) -> float:
        return float(np.sum(self.durations_us)) if self.slices else 0.0

    def with_controls(self, amplitudes: np.ndarray,
                      phases: np.ndarray | None = None) -> "PulseSequence":
        """Copy with new per-slice amplitudes (and optionally phases)."""
        if phases is None:
            phases = self.phases
        slices = tuple(zip(self.durations_us, np.asarray(amplitudes, float),
                           np.asarray(phases, float)))
        return replace(self, slices=slices)


def uniform_pulse(carrier_freq_mhz: float, max_rabi_mhz: float,
                  amplitudes: np.ndarray, slice_ns: float,
                  phases: np.ndarray | None = None,
                  phase_enabled: bool = False) -> PulseSequence:
    """Pulse with equal slice length ``slice_ns`` (nanoseconds)."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    if phases is None:
        phases = np.zeros_like(amplitudes)
    dur = slice_ns * 1e-3
    slices = tuple((dur, float(a), float(p)) for a, p in zip(amplitudes, phases))
    return PulseSequence(carrier_freq_mhz, max_rabi_mhz, slices, phase_enabled)


# ---------------------------------------------------------------------------
# Rotating-frame control model


def rotating_frame_hamiltonian(sys: SpinSystem, carrier_freq_mhz: float) -> np.ndarray:
    """H_0 - 2pi*Omega*S_z in the product basis (rad/us).

    Exact for the secular model: the frame transform commutes with H_0.
    """
    s_z = build_operators(sys.n_nuclei)["S_z"]
    return build_secular_hamiltonian(sys) - TWO_PI * carrier_freq_mhz * s_z


def slice_hamiltonian(sys: SpinSystem, carrier_freq_mhz: float, max_rabi_mhz: float,
                      amplitude: float, phase_rad: float = 0.0) -> np.ndarray:
    """Rotating-frame Hamiltonian of one slice, product basis (rad/us)."""
    if abs(amplitude) > 1.0 + 1e-12:
        raise ValueError("amplitude must lie in [-1, 1]")
    ops = build_operators(sys.n_nuclei)
    drive = np.cos(phase_rad) * ops["S_x"] + np.sin(phase_rad) * ops["S_y"]
    return (rotating_frame_hamiltonian(sys, carrier_freq_mhz)
            + TWO_PI * max_rabi_mhz * amplitude * drive)


@dataclass(frozen=True)
class ControlFrame:
    """Precomputed level-basis rotating-frame model for one carrier."""

    sys: SpinSystem
    carrier_freq_mhz: float
    h0_diag_rad: np.ndarray   # free rotating-frame energies by level, rad/us
    sx: np.ndarray            # electron S_x in the level basis
    sy: np.ndarray
    basis: np.ndarray         # product-basis -> level-basis unitary (columns)

    def __post_init__(self):
        for arr in (self.h0_diag_rad, self.sx, self.sy, self.basis):
            arr.setflags(write=False)

    def slice_h(self, max_rabi_mhz: float, amplitude: float, phase_rad: float) -> np.ndarray:
        w1 = TWO_PI * max_rabi_mhz * amplitude
        h = w1 * (np.cos(phase_rad) * self.sx + np.sin(phase_rad) * self.sy)
        h[np.diag_indices_from(h)] += self.h0_diag_rad
        return h

    def free_propagator(self, tau_us: float) -> np.ndarray:
        return np.diag(np.exp(-1j * self.h0_diag_rad * tau_us))


@lru_cache(maxsize=64)
def control_frame(sys: SpinSystem, carrier_freq_mhz: float) -> ControlFrame:
    """Level-basis frame for ``sys`` at the given carrier (cached).

    The free part is built directly from the labeled energies,
    2pi*(E_l - Omega*m_s(l)), avoiding GHz-scale cancellation in the matrix
    transform.
    """
    eigs = system_eigensystem(sys)
    w = eigs.level_basis
    ops = build_operators(sys.n_nuclei)
    h0 = TWO_PI * (eigs.level_energies_mhz - carrier_freq_mhz * eigs.level_manifold)
    return ControlFrame(
        sys=sys,
        carrier_freq_mhz=carrier_freq_mhz,
        h0_diag_rad=h0,
        sx=w.conj().T @ ops["S_x"] @ w,
        sy=w.conj().T @ ops["S_y"] @ w,
        basis=w,
    )


def _slice_stack(frame: ControlFrame, pulse: PulseSequence) -> np.ndarray:
    """All slice Hamiltonians as one (n_slices, dim, dim) stack."""
    amps, phases = pulse.amplitudes, pulse.phases
    w1 = TWO_PI * pulse.max_rabi_mhz
    drive = (np.cos(phases)[:, None, None] * frame.sx
             + np.sin(phases)[:, None, None] * frame.sy)
    h = w1 * amps[:, None, None] * drive
    idx = np.arange(frame.h0_diag_rad.size)
    h[:, idx, idx] += frame.h0_diag_rad
    return h


def _slice_propagators(h_stack: np.ndarray, durations_us: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched exact exponentials exp(-i H_m dt_m); returns (lam, v, units)."""
    lam, v = np.linalg.eigh(h_stack)
    phase = np.exp(-1j * lam * durations_us[:, None])
    units = (v * phase[:, None, :]) @ np.conjugate(np.swapaxes(v, 1, 2))
    return lam, v, units


def propagate(pulse: PulseSequence, sys: SpinSystem) -> np.ndarray:
    """Total propagator of the pulse in the labeled-level basis.

    Time-ordered product U = U_M ... U_2 U_1 (slice 1 acts first); each slice
    is exponentiated exactly via eigendecomposition.
    """
    frame = control_frame(sys, pulse.carrier_freq_mhz)
    u = np.eye(sys.dim, dtype=complex)
    if pulse.n_slices:
        _, _, units = _slice_propagators(_slice_stack(frame, pulse),
                                         pulse.durations_us)
        for um in units:
            u = um @ u
    defect = unitarity_defect(u)
    if defect > UNITARITY_TOL:
        raise FloatingPointError(f"propagator unitarity defect {defect:.3e}")
    return u


def gate_fidelity(u: np.ndarray, target: np.ndarray) -> float:
    """|Tr(target^dagger u)|^2 / dim^2, invariant under a global phase."""
    if u.shape != target.shape:
        raise ValueError("operators must have the same dimension")
    d = u.shape[0]
    return float(np.abs(np.trace(target.conj().T @ u)) ** 2) / d**2


def _dexp_factors(lam: np.ndarray, durations_us: np.ndarray) -> np.ndarray:
    """Loewner matrices of exp(-i lam dt), stacked over slices: divided
    differences (e^{-i a dt} - e^{-i b dt})/(a - b) with the diagonal limit
    -i dt e^{-i a dt}.

    Uses the stable closed form -i dt e^{-i (a+b)/2 dt} sinc((a-b) dt / 2).
    """
    dt = durations_us[:, None, None]
    mean = 0.5 * (lam[:, :, None] + lam[:, None, :])
    delta = 0.5 * (lam[:, :, None] - lam[:, None, :]) * dt
    return -1j * dt * np.exp(-1j * mean * dt) * np.sinc(delta / np.pi)


def fidelity_and_gradient(pulse: PulseSequence, sys: SpinSystem,
                          target: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Gate fidelity and its exact per-slice gradients.

    Returns (F, dF/d amplitude, dF/d phase), each gradient an array of
    length n_slices. Exact in the piecewise-constant model: the derivative
    of each slice exponential is evaluated through the eigendecomposition of
    its Hamiltonian (no small-step approximation).
    """
    frame = control_frame(sys, pulse.carrier_freq_mhz)
    d = sys.dim
    m_slices = pulse.n_slices
    td = target.conj().T
    if m_slices == 0:
        overlap = np.trace(td)
        return float(np.abs(overlap) ** 2) / d**2, np.zeros(0), np.zeros(0)

    amps, phases, durs = pulse.amplitudes, pulse.phases, pulse.durations_us
    w1 = TWO_PI * pulse.max_rabi_mhz
    lam, v, units = _slice_propagators(_slice_stack(frame, pulse), durs)
    vh = np.conjugate(np.swapaxes(v, 1, 2))
    phi = _dexp_factors(lam, durs)

    # forward[m] = U_m ... U_1 (forward[0] = 1); backward[m] = U_M ... U_{m+1}
    forward = np.empty((m_slices + 1, d, d), dtype=complex)
    forward[0] = np.eye(d)
    for m in range(m_slices):
        forward[m + 1] = units[m] @ forward[m]
    backward = np.empty((m_slices + 1, d, d), dtype=complex)
    backward[m_slices] = np.eye(d)
    for m in range(m_slices - 1, -1, -1):
        backward[m] = backward[m + 1] @ units[m]

    overlap = np.trace(td @ forward[-1])

    # dF/dtheta = 2/d^2 Re(conj(A) Tr(G dU_m)) with G = L_{m-1} T^dag R_m and
    # dU_m = V [(V^dag C V) o Phi] V^dag evaluated in each slice's eigenbasis.
    g = forward[:-1] @ td @ backward[1:]
    gt = np.swapaxes(vh @ g @ v, 1, 2)
    cos_p, sin_p = np.cos(phases), np.sin(phases)
    c_amp = w1 * (cos_p[:, None, None] * frame.sx + sin_p[:, None, None] * frame.sy)
    c_phase = (w1 * amps)[:, None, None] * (-sin_p[:, None, None] * frame.sx
                                            + cos_p[:, None, None] * frame.sy)
    scale = 2.0 / d**2 * np.conj(overlap)
    grads = []
    for c in (c_amp, c_phase):
        d_overlap = np.sum(gt * ((vh @ c @ v) * phi), axis=(1, 2))
        grads.append(np.real(scale * d_overlap))

    fid = float(np.abs(overlap) ** 2) / d**2
    return fid, grads[0], grads[1]


def fidelity_gradient(pulse: PulseSequence, sys: SpinSystem,
                      target: np.ndarray) -> list[tuple[float, float]]:
    """Per-slice (dF/d amplitude, dF/d phase) pairs."""
    _, ga, gp = fidelity_and_gradient(pulse, sys, target)
    return list(zip(ga.tolist(), gp.tolist()))


# ---------------------------------------------------------------------------
# Resonator bandwidth filter


def q_filter(pulse: PulseSequence, resonator_q: float,
             center_freq_mhz: float) -> PulseSequence:
    """Apply a single-pole resonator response to the baseband envelope.

    The complex envelope a(t) e^{i phi(t)} is multiplied in the frequency
    domain by 1 / (1 + i f / f_h) with half-width f_h = f0 / (2Q) about the
    carrier (baseband zero). Requires a uniform slice grid. If the filtered
    amplitude exceeds 1 anywhere the whole envelope is rescaled (reported
    via a warning log).
    """
    if resonator_q <= 0.0:
        raise ValueError("resonator_q must be positive")
    if pulse.n_slices == 0:
        return pulse
    durs = pulse.durations_us
    if not np.allclose(durs, durs[0], rtol=1e-9, atol=0.0):
        raise ValueError("q_filter requires a uniform slice grid")
    dt = durs[0]

    envelope = pulse.amplitudes * np.exp(1j * pulse.phases)
    freqs = np.fft.fftfreq(pulse.n_slices, d=dt)  # MHz
    half_width = center_freq_mhz / (2.0 * resonator_q)
    transfer = 1.0 / (1.0 + 1j * freqs / half_width)
    filtered = np.fft.ifft(np.fft.fft(envelope) * transfer)

    peak = float(np.max(np.abs(filtered)))
    if peak > 1.0:
        log.warning("q_filter: filtered amplitude peak %.6f > 1, renormalizing", peak)
        filtered = filtered / peak

    if np.max(np.abs(filtered.imag)) <= 1e-12 * max(1.0, np.max(np.abs(filtered))):
        amps = filtered.real
        phases = np.zeros_like(amps)
        phase_enabled = pulse.phase_enabled
    else:
        amps = np.abs(filtered)
        phases = np.angle(filtered)
        phase_enabled = True
    out = pulse.with_controls(amps, phases)
    return replace(out, phase_enabled=phase_enabled)


# ---------------------------------------------------------------------------
# Pulse file format
#
# Plain text; three header lines then one row per slice:
#   # carrier_mhz=<float>
#   # max_rabi_mhz=<float>
#   # phase_enabled=<0|1>
#   <duration_ns> <amplitude> <phase_rad>
# Serialization is canonical so parse -> serialize round-trips byte-for-byte.


def serialize_pulse(pulse: PulseSequence) -> str:
    buf = io.StringIO()
    buf.write(f"# carrier_mhz={pulse.carrier_freq_mhz:.6f}\n")
    buf.write(f"# max_rabi_mhz={pulse.max_rabi_mhz:.6f}\n")
    buf.write(f"# phase_enabled={1 if pulse.phase_enabled else 0}\n")
    for dur_us, amp, phase in pulse.slices:
        buf.write(f"{dur_us * 1e3:.6f} {amp:.12e} {phase:.12e}\n")
    return buf.getvalue()


def parse_pulse(text: str) -> PulseSequence:
    header: dict[str, str] = {}
    slices = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"pulse file line {lineno}: expected "
                             f"'duration_ns amplitude phase_rad', got {raw!r}")
        try:
            dur_ns, amp, phase = (float(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"pulse file line {lineno}: {exc}") from None
        slices.append((dur_ns * 1e-3, amp, phase))
    for key in ("carrier_mhz", "max_rabi_mhz", "phase_enabled"):
        if key not in header:
            raise ValueError(f"pulse file missing header '# {key}=...'")
    return PulseSequence(
        carrier_freq_mhz=float(header["carrier_mhz"]),
        max_rabi_mhz=float(header["max_rabi_mhz"]),
        slices=tuple(slices),
        phase_enabled=header["phase_enabled"].strip() not in ("0", "false", "False"),
    )


def write_pulse_file(path, pulse: PulseSequence) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_pulse(pulse))


def read_pulse_file(path) -> PulseSequence:
    with open(path) as fh:
        return parse_pulse(fh.read())
