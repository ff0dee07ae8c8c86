"""Spin-1/2 operator construction and two-level subspace algebra.

All operators are dense complex numpy arrays. The composite Hilbert space is
ordered electron-first: basis index ``i = e * 2**n + m`` where ``e`` is the
electron bit (0 = spin up, i.e. m_s = +1/2) and ``m`` enumerates the nuclear
product states, nucleus 1 in the most significant nuclear bit.

Level labels used by :func:`pair_sigma` and :func:`subspace_rotation` are
1-based, matching the energy-level numbering produced by
:func:`spingate.spinsys.eigensystem`.
"""

from __future__ import annotations

import numpy as np

# Single spin-1/2 matrices (dimensionless, hbar = 1).
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SPIN_X = 0.5 * SIGMA_X
SPIN_Y = 0.5 * SIGMA_Y
SPIN_Z = 0.5 * SIGMA_Z

# Dense matrices become unwieldy past 2**13; refuse rather than thrash.
MAX_NUCLEI = 12

_AXES = {"x": SPIN_X, "y": SPIN_Y, "z": SPIN_Z}


def embed(single: np.ndarray, slot: int, n_spins: int) -> np.ndarray:
    """Kronecker-embed a single-spin matrix at position ``slot`` of ``n_spins``.

    Slot 0 is the electron (leftmost factor in the product).
    """
    if not 0 <= slot < n_spins:
        raise ValueError(f"slot {slot} out of range for {n_spins} spins")
    out = np.array([[1.0 + 0.0j]])
    for s in range(n_spins):
        out = np.kron(out, single if s == slot else np.eye(2, dtype=complex))
    return out


def build_operators(n_nuclei: int) -> dict[str, np.ndarray]:
    """Spin operators for one electron and ``n_nuclei`` nuclear spins.

    Returns a dict with keys ``S_x``, ``S_y``, ``S_z`` for the electron and
    ``I_x^k`` etc. for nucleus ``k`` (1-based), each a ``2**(n+1)`` square
    matrix with eigenvalues +-1/2.
    """
    if n_nuclei < 0:
        raise ValueError("n_nuclei must be >= 0")
    if n_nuclei > MAX_NUCLEI:
        raise ValueError(
            f"n_nuclei = {n_nuclei} exceeds the dense-matrix guard ({MAX_NUCLEI})"
        )
    n_spins = n_nuclei + 1
    ops = {}
    for name, mat in (("S_x", SPIN_X), ("S_y", SPIN_Y), ("S_z", SPIN_Z)):
        ops[name] = embed(mat, 0, n_spins)
    for k in range(1, n_nuclei + 1):
        for ax, mat in _AXES.items():
            ops[f"I_{ax}^{k}"] = embed(mat, k, n_spins)
    return ops


def pair_sigma(dim: int, j: int, k: int, axis: str = "x") -> np.ndarray:
    """Pauli operator on the two-level subspace spanned by levels ``j`` and ``k``.

    sigma_x^{jk} = |j><k| + |k><j|, sigma_y^{jk} = i|j><k| - i|k><j|,
    sigma_z^{jk} = |j><j| - |k><k|, all zero outside the pair. Levels are
    1-based and must satisfy 1 <= j < k <= dim.
    """
    if not 1 <= j < k <= dim:
        raise ValueError(f"need 1 <= j < k <= dim, got j={j}, k={k}, dim={dim}")
    a, b = j - 1, k - 1
    out = np.zeros((dim, dim), dtype=complex)
    if axis == "x":
        out[a, b] = 1.0
        out[b, a] = 1.0
    elif axis == "y":
        out[a, b] = 1.0j
        out[b, a] = -1.0j
    elif axis == "z":
        out[a, a] = 1.0
        out[b, b] = -1.0
    else:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    return out


def subspace_rotation(dim: int, j: int, k: int, theta: float, axis: str = "x") -> np.ndarray:
    """Unitary exp(-i theta/2 sigma_axis^{jk}): an SU(2) rotation on the
    span of levels ``j``, ``k`` and the identity elsewhere.
    """
    sigma = pair_sigma(dim, j, k, axis)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    u = np.eye(dim, dtype=complex)
    a, b = j - 1, k - 1
    # exp(-i t/2 sigma) restricted to the pair: cos(t/2) 1 - i sin(t/2) sigma.
    for p in (a, b):
        for q in (a, b):
            u[p, q] = (1.0 if p == q else 0.0) * c - 1.0j * s * sigma[p, q]
    return u


def hermiticity_defect(op: np.ndarray) -> float:
    """Max elementwise |H - H^dagger|."""
    return float(np.max(np.abs(op - op.conj().T)))


def unitarity_defect(op: np.ndarray) -> float:
    """Max elementwise |U^dagger U - 1|."""
    d = op.shape[0]
    return float(np.max(np.abs(op.conj().T @ op - np.eye(d))))


def assert_hermitian(op: np.ndarray, tol: float = 1e-12) -> None:
    defect = hermiticity_defect(op)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {tol:.1e})")


def assert_unitary(op: np.ndarray, tol: float = 1e-10) -> None:
    defect = unitarity_defect(op)
    if defect > tol:
        raise ValueError(f"matrix is not unitary (defect {defect:.3e} > {tol:.1e})")
