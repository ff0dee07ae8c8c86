"""Named gate targets in the labeled-level basis.

Level-subspace gates (``u12_pi2``, ``u_r``, ``u_pc``) act on explicit level
pairs of the 1e-1n system. Logical two-/three-qubit gates (``swap_en``,
``cnot_hc``) are permutations of the logical computational basis. The
logical encoding: electron bit 0 is the spin-up (m_s = +1/2) manifold, and
each nuclear bit 0 is the lower eigenstate of that nucleus' effective field
within its manifold. Under this convention the electron-nuclear SWAP of the
canonical 1e-1n system exchanges the outermost levels (1 and 4), i.e. it is
driven on the carrier-resonant transition, which is what makes it survive a
resonator of realistic bandwidth.
"""

from __future__ import annotations

import numpy as np

from .operators import subspace_rotation
from .spinsys import SpinSystem, quantization_axes, system_eigensystem

# Overlap below which a level cannot be identified with a logical product
# state (never happens for a secular Hamiltonian).
MIN_LOGICAL_OVERLAP_SQ = 0.9


def level_of_logical(sys: SpinSystem) -> np.ndarray:
    """Map logical basis indices to level numbers.

    Logical index ``L`` has bits (electron, nucleus 1, ..., nucleus N),
    electron most significant; electron bit 0 means spin-up (m_s = +1/2).
    Returns an array ``lvl`` with ``lvl[L]`` the 1-based level whose
    eigenstate matches the logical product state.
    """
    eigs = system_eigensystem(sys)
    n = sys.n_nuclei
    dim = sys.dim
    basis = eigs.level_basis

    # Per-manifold single-nucleus eigenvectors, index 0 = lower eigenvalue.
    nuc_states: dict[float, list[np.ndarray]] = {}
    for ms in (-0.5, 0.5):
        per_nucleus = []
        for k in range(1, n + 1):
            hx, hy, hz = (quantization_axes(sys, k).field_down_mhz if ms < 0
                          else quantization_axes(sys, k).field_up_mhz)
            h2 = 0.5 * np.array([[hz, hx - 1j * hy], [hx + 1j * hy, -hz]])
            _, vecs = np.linalg.eigh(h2)
            per_nucleus.append([vecs[:, 0], vecs[:, 1]])
        nuc_states[ms] = per_nucleus

    e_up = np.array([1.0, 0.0], dtype=complex)    # product-basis electron up
    e_down = np.array([0.0, 1.0], dtype=complex)

    lvl = np.zeros(dim, dtype=int)
    used = set()
    for logical in range(dim):
        bits = [(logical >> (n - i)) & 1 for i in range(n + 1)]  # e, j_1..j_N
        ms = -0.5 if bits[0] else 0.5  # electron bit 0 = spin-up
        state = e_down if bits[0] else e_up
        for k in range(n):
            state = np.kron(state, nuc_states[ms][k][bits[1 + k]])
        overlaps = np.abs(basis.conj().T @ state) ** 2
        level = int(np.argmax(overlaps)) + 1
        if overlaps[level - 1] < MIN_LOGICAL_OVERLAP_SQ:
            raise ValueError(
                f"logical state {logical:0{n + 1}b} has no matching level "
                f"(best overlap {overlaps[level - 1]:.3f})")
        if level in used:
            raise ValueError("two logical states map to the same level")
        used.add(level)
        lvl[logical] = level
    return lvl


def logical_gate(sys: SpinSystem, matrix: np.ndarray) -> np.ndarray:
    """Re-express a gate given in the logical computational basis in the
    labeled-level basis."""
    lvl = level_of_logical(sys)
    dim = sys.dim
    out = np.zeros((dim, dim), dtype=complex)
    for r in range(dim):
        for c in range(dim):
            out[lvl[r] - 1, lvl[c] - 1] = matrix[r, c]
    return out


def u12_pi2(sys: SpinSystem) -> np.ndarray:
    """pi/2 rotation on levels 1-2: creates nuclear coherence in the lower
    electron manifold."""
    return subspace_rotation(sys.dim, 1, 2, np.pi / 2, "x")


def u_r(sys: SpinSystem) -> np.ndarray:
    """Refocusing pi rotation on both nuclear pairs of a 1e-1n system:
    U_12(pi) on levels 1-2 and U_34(pi) on levels 3-4."""
    if sys.dim != 4:
        raise ValueError("u_r is defined for the 1e-1n system (dim 4)")
    return subspace_rotation(4, 1, 2, np.pi, "x") @ subspace_rotation(4, 3, 4, np.pi, "x")


def u_pc(sys: SpinSystem) -> np.ndarray:
    """Polarization transfer plus coherence creation: U_12(pi/2) U_24(pi).

    U_24(pi) acts first, moving electron polarization onto the 1-2 nuclear
    pair; U_12(pi/2) then turns the population difference into coherence.
    """
    if sys.dim != 4:
        raise ValueError("u_pc is defined for the 1e-1n system (dim 4)")
    return subspace_rotation(4, 1, 2, np.pi / 2, "x") @ subspace_rotation(4, 2, 4, np.pi, "x")


def swap_en(sys: SpinSystem) -> np.ndarray:
    """Electron-nuclear SWAP on the logical qubits of a 1e-1n system."""
    if sys.dim != 4:
        raise ValueError("swap_en is defined for the 1e-1n system (dim 4)")
    m = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    return logical_gate(sys, m)


def cnot_hc(sys: SpinSystem) -> np.ndarray:
    """Nuclear-nuclear CNOT on a 1e-2n system, identity on the electron:
    nucleus 1 controls, nucleus 2 is flipped."""
    if sys.dim != 8:
        raise ValueError("cnot_hc is defined for a 1e-2n system (dim 8)")
    m = np.eye(8, dtype=complex)
    for e in (0, 1):
        a = (e << 2) | 0b10  # control set, target 0
        b = (e << 2) | 0b11  # control set, target 1
        m[[a, b]] = m[[b, a]]
    return logical_gate(sys, m)


NAMED_TARGETS = {
    "u12_pi2": u12_pi2,
    "u_r": u_r,
    "u_pc": u_pc,
    "swap_en": swap_en,
    "cnot_hc": cnot_hc,
}


def named_target(sys: SpinSystem, name: str) -> np.ndarray:
    try:
        builder = NAMED_TARGETS[name]
    except KeyError:
        known = ", ".join(sorted(NAMED_TARGETS))
        raise ValueError(f"unknown target {name!r}; known targets: {known}") from None
    return builder(sys)
