"""Electron-nuclear spin systems and their Hamiltonians.

Conventions
-----------
* All stored frequencies are linear MHz. Hamiltonian matrices are angular,
  in rad/us (a term of f MHz contributes 2*pi*f). Time is in microseconds.
* The secular Hamiltonian keeps only electron terms involving S_z::

      H / 2pi = nu_s S_z - sum_k nu_n^k I_z^k
                + sum_k (A_zx^k S_z I_x^k + A_zy^k S_z I_y^k + A_zz^k S_z I_z^k)

  which commutes with S_z, so every eigenstate has a definite electron
  projection m_s = +-1/2.
* Energy levels are numbered 1..dim: the m_s = -1/2 (lower Zeeman) manifold
  first in ascending energy, then the m_s = +1/2 manifold in ascending
  energy. For the canonical malonic-acid system this puts the 7.8 MHz
  nuclear splitting on levels (1, 2) and the 40 MHz splitting on (3, 4),
  with the 1-4 transition as the usual microwave carrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.constants import physical_constants

from .operators import MAX_NUCLEI, assert_hermitian, build_operators, embed, SPIN_X, SPIN_Y, SPIN_Z

TWO_PI = 2.0 * np.pi

# Bohr magneton over Planck constant, MHz/T.
BOHR_MAGNETON_MHZ_PER_T = physical_constants["Bohr magneton in Hz/T"][0] / 1e6

# Levels closer than this (in MHz) count as degenerate for labeling purposes.
DEGENERACY_TOL_MHZ = 1e-6


@dataclass(frozen=True)
class NucleusSpec:
    """One spin-1/2 nucleus: Zeeman frequency and secular hyperfine row (MHz).

    ``zeeman_freq_mhz`` enters the Hamiltonian with a minus sign
    (-nu_n I_z). A nonzero ``a_zx``/``a_zy`` makes the hyperfine coupling
    anisotropic, tilting the nuclear quantization axis away from z.
    """

    zeeman_freq_mhz: float
    a_zx_mhz: float = 0.0
    a_zy_mhz: float = 0.0
    a_zz_mhz: float = 0.0

    @property
    def anisotropic(self) -> bool:
        return self.a_zx_mhz != 0.0 or self.a_zy_mhz != 0.0


@dataclass(frozen=True)
class SpinSystem:
    """One electron (S = 1/2) coupled to N nuclear spins (I = 1/2)."""

    electron_freq_mhz: float
    nuclei: tuple[NucleusSpec, ...] = ()

    def __post_init__(self):
        if self.electron_freq_mhz <= 0:
            raise ValueError("electron_freq_mhz must be positive")
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if len(self.nuclei) > MAX_NUCLEI:
            raise ValueError(f"at most {MAX_NUCLEI} nuclei supported")

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def dim(self) -> int:
        return 2 ** (1 + self.n_nuclei)


@dataclass(eq=False)
class FullSystemSpec:
    """Full-tensor description: g tensor, 3x3 hyperfine/chemical-shift tensors,
    nuclear dipole-dipole tensors and an arbitrary static field.

    Used as a test oracle for the secular model; fields in tesla, MHz and
    MHz/T so that beta_e/h converts the electron Zeeman term to MHz.
    """

    g_tensor: np.ndarray                      # 3x3, dimensionless
    b_field_t: np.ndarray                     # 3-vector, tesla
    gyromagnetic_mhz_per_t: tuple[float, ...]  # per nucleus
    hyperfine_tensors_mhz: np.ndarray         # (N, 3, 3)
    chem_shift_tensors: np.ndarray | None = None   # (N, 3, 3), dimensionless
    dipole_tensors_mhz: np.ndarray | None = None   # (N, N, 3, 3)

    def __post_init__(self):
        self.g_tensor = np.asarray(self.g_tensor, dtype=float)
        self.b_field_t = np.asarray(self.b_field_t, dtype=float)
        self.hyperfine_tensors_mhz = np.asarray(self.hyperfine_tensors_mhz, dtype=float)
        n = len(self.gyromagnetic_mhz_per_t)
        if self.g_tensor.shape != (3, 3):
            raise ValueError("g_tensor must be 3x3")
        if self.b_field_t.shape != (3,):
            raise ValueError("b_field_t must be a 3-vector")
        if self.hyperfine_tensors_mhz.shape != (n, 3, 3):
            raise ValueError("hyperfine_tensors_mhz must have shape (N, 3, 3)")
        if self.chem_shift_tensors is None:
            self.chem_shift_tensors = np.zeros((n, 3, 3))
        self.chem_shift_tensors = np.asarray(self.chem_shift_tensors, dtype=float)
        if self.chem_shift_tensors.shape != (n, 3, 3):
            raise ValueError("chem_shift_tensors must have shape (N, 3, 3)")
        if self.dipole_tensors_mhz is None:
            self.dipole_tensors_mhz = np.zeros((n, n, 3, 3))
        self.dipole_tensors_mhz = np.asarray(self.dipole_tensors_mhz, dtype=float)
        if self.dipole_tensors_mhz.shape != (n, n, 3, 3):
            raise ValueError("dipole_tensors_mhz must have shape (N, N, 3, 3)")
        for k in range(n):
            if np.any(self.dipole_tensors_mhz[k, k] != 0.0):
                raise ValueError("dipole tensor D^{kk} (self-coupling) must be zero")
            for l in range(n):
                if not np.allclose(self.dipole_tensors_mhz[k, l],
                                   self.dipole_tensors_mhz[l, k].T, atol=1e-12):
                    raise ValueError("dipole tensors must satisfy D^{kl} = (D^{lk})^T")

    @property
    def n_nuclei(self) -> int:
        return len(self.gyromagnetic_mhz_per_t)


def build_secular_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """Secular Hamiltonian in rad/us; commutes with the electron S_z."""
    ops = build_operators(sys.n_nuclei)
    h = sys.electron_freq_mhz * ops["S_z"]
    for k, nuc in enumerate(sys.nuclei, start=1):
        h = h - nuc.zeeman_freq_mhz * ops[f"I_z^{k}"]
        h = h + nuc.a_zx_mhz * ops["S_z"] @ ops[f"I_x^{k}"]
        h = h + nuc.a_zy_mhz * ops["S_z"] @ ops[f"I_y^{k}"]
        h = h + nuc.a_zz_mhz * ops["S_z"] @ ops[f"I_z^{k}"]
    return TWO_PI * h


def build_full_hamiltonian(spec: FullSystemSpec) -> np.ndarray:
    """Full-tensor Hamiltonian in rad/us.

    Electron Zeeman (beta_e g S.B / h), nuclear Zeeman with chemical shift
    (-gamma_k (1 - delta^k) I.B), full hyperfine (S A^k I^k) and nuclear
    dipole-dipole (1/2 I^k D^{kl} I^l, the 1/2 compensating the double sum).
    """
    n = spec.n_nuclei
    n_spins = n + 1
    s_ops = [embed(m, 0, n_spins) for m in (SPIN_X, SPIN_Y, SPIN_Z)]
    i_ops = [[embed(m, k + 1, n_spins) for m in (SPIN_X, SPIN_Y, SPIN_Z)]
             for k in range(n)]

    dim = 2 ** n_spins
    h = np.zeros((dim, dim), dtype=complex)
    # Electron Zeeman: beta_e/h * g_{mu nu} S_mu B_nu  (MHz)
    gb = BOHR_MAGNETON_MHZ_PER_T * (spec.g_tensor @ spec.b_field_t)
    for mu in range(3):
        h += gb[mu] * s_ops[mu]
    # Nuclear Zeeman, shielded: -gamma_k (1 - delta)_{mu nu} I_mu B_nu
    for k in range(n):
        shield = np.eye(3) - spec.chem_shift_tensors[k]
        gbn = spec.gyromagnetic_mhz_per_t[k] * (shield @ spec.b_field_t)
        for mu in range(3):
            h -= gbn[mu] * i_ops[k][mu]
    # Hyperfine: A^k_{mu nu} S_mu I^k_nu
    for k in range(n):
        a = spec.hyperfine_tensors_mhz[k]
        for mu in range(3):
            for nu in range(3):
                if a[mu, nu] != 0.0:
                    h += a[mu, nu] * s_ops[mu] @ i_ops[k][nu]
    # Dipole-dipole: (1/2) D^{kl}_{mu nu} I^k_mu I^l_nu over all ordered pairs
    for k in range(n):
        for l in range(n):
            if l == k:
                continue
            d = spec.dipole_tensors_mhz[k, l]
            for mu in range(3):
                for nu in range(3):
                    if d[mu, nu] != 0.0:
                        h += 0.5 * d[mu, nu] * i_ops[k][mu] @ i_ops[l][nu]
    return TWO_PI * h


def to_secular(spec: FullSystemSpec) -> SpinSystem:
    """Secular reduction of a full spec with B along z: keeps g_zz, the
    shielded nuclear Zeeman frequencies and the z-rows of the hyperfine
    tensors; drops the dipole-dipole coupling.
    """
    if spec.b_field_t[0] != 0.0 or spec.b_field_t[1] != 0.0:
        raise ValueError("secular reduction requires B along z")
    b0 = spec.b_field_t[2]
    nuclei = []
    for k in range(spec.n_nuclei):
        nu_n = spec.gyromagnetic_mhz_per_t[k] * (1.0 - spec.chem_shift_tensors[k][2, 2]) * b0
        a = spec.hyperfine_tensors_mhz[k]
        nuclei.append(NucleusSpec(zeeman_freq_mhz=nu_n, a_zx_mhz=a[2, 0],
                                  a_zy_mhz=a[2, 1], a_zz_mhz=a[2, 2]))
    return SpinSystem(
        electron_freq_mhz=BOHR_MAGNETON_MHZ_PER_T * spec.g_tensor[2, 2] * b0,
        nuclei=tuple(nuclei),
    )


@dataclass(frozen=True)
class EigenStructure:
    """Labeled eigensystem of a spin Hamiltonian.

    ``energies_mhz``/``states`` are in ascending-energy order; ``labels[i]``
    is the 1-based level number of ascending index ``i``. Level-ordered
    views are exposed as properties. ``manifold`` holds m_s = +-0.5 per
    ascending index. ``degenerate_pairs`` lists level pairs closer than the
    degeneracy tolerance; when non-empty the labeling is ambiguous.
    """

    energies_mhz: np.ndarray
    states: np.ndarray
    labels: np.ndarray
    manifold: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for arr in (self.energies_mhz, self.states, self.labels, self.manifold):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def level_order(self) -> np.ndarray:
        """Ascending-index permutation that sorts by level label."""
        return np.argsort(self.labels)

    @property
    def level_energies_mhz(self) -> np.ndarray:
        """Energies indexed by level number (entry 0 = level 1)."""
        return self.energies_mhz[self.level_order]

    @property
    def level_basis(self) -> np.ndarray:
        """Unitary whose column l-1 is the eigenvector of level l."""
        return self.states[:, self.level_order]

    @property
    def level_manifold(self) -> np.ndarray:
        """m_s = +-0.5 per level number (entry 0 = level 1)."""
        return self.manifold[self.level_order]

    def transition_freq_mhz(self, j: int, k: int) -> float:
        """|E_k - E_j| between two 1-based levels, in MHz."""
        e = self.level_energies_mhz
        return float(abs(e[k - 1] - e[j - 1]))


def _fix_gauge(states: np.ndarray) -> np.ndarray:
    """Make each eigenvector's largest-magnitude component real positive."""
    out = states.copy()
    for i in range(out.shape[1]):
        v = out[:, i]
        idx = int(np.argmax(np.abs(v)))
        ph = v[idx] / abs(v[idx])
        out[:, i] = v / ph
    return out


def eigensystem(h: np.ndarray, sys: SpinSystem,
                degeneracy_tol_mhz: float = DEGENERACY_TOL_MHZ) -> EigenStructure:
    """Diagonalize ``h`` (rad/us) and label levels.

    Eigenvectors are assigned to the electron manifold where they have at
    least half their weight; labels run over the m_s = -1/2 manifold in
    ascending energy, then the m_s = +1/2 manifold.
    """
    assert_hermitian(h, tol=1e-9 * max(1.0, float(np.max(np.abs(h)))))
    w, v = np.linalg.eigh(h)
    energies = w / TWO_PI
    v = _fix_gauge(v)

    half = sys.dim // 2
    p_up = np.sum(np.abs(v[:half, :]) ** 2, axis=0)  # electron-up weight per state
    manifold = np.where(p_up >= 0.5, 0.5, -0.5)

    labels = np.empty(sys.dim, dtype=int)
    next_label = 1
    for ms in (-0.5, 0.5):
        idx = np.flatnonzero(manifold == ms)  # ascending energy within manifold
        for i in idx:
            labels[i] = next_label
            next_label += 1

    degenerate = []
    for i in range(sys.dim):
        for j in range(i + 1, sys.dim):
            if abs(energies[i] - energies[j]) < degeneracy_tol_mhz:
                degenerate.append((int(labels[i]), int(labels[j])))

    return EigenStructure(
        energies_mhz=energies,
        states=v,
        labels=labels,
        manifold=manifold,
        degenerate_pairs=tuple(sorted(degenerate)),
    )


@lru_cache(maxsize=64)
def system_eigensystem(sys: SpinSystem) -> EigenStructure:
    """Eigensystem of the secular Hamiltonian of ``sys`` (cached)."""
    return eigensystem(build_secular_hamiltonian(sys), sys)


def transition_table(eigs: EigenStructure) -> list[tuple[int, int, float, float]]:
    """All level pairs (j < k) with transition frequency and |<k|S_x|j>|.

    The S_x matrix element gauges how strongly a resonant microwave field
    drives the transition; within-manifold pairs have zero element for a
    secular Hamiltonian.
    """
    dim = eigs.dim
    n_nuclei = int(np.log2(dim)) - 1
    s_x = build_operators(n_nuclei)["S_x"]
    basis = eigs.level_basis
    sx_eig = basis.conj().T @ s_x @ basis
    energies = eigs.level_energies_mhz
    rows = []
    for j in range(1, dim + 1):
        for k in range(j + 1, dim + 1):
            rows.append((j, k,
                         float(abs(energies[k - 1] - energies[j - 1])),
                         float(abs(sx_eig[k - 1, j - 1]))))
    return rows


@dataclass(frozen=True)
class QuantizationAxes:
    """Effective nuclear fields (MHz) for the two electron projections."""

    field_up_mhz: tuple[float, float, float]    # m_s = +1/2
    field_down_mhz: tuple[float, float, float]  # m_s = -1/2
    angle_rad: float


def quantization_axes(sys: SpinSystem, nucleus: int) -> QuantizationAxes:
    """Effective field seen by nucleus ``nucleus`` (1-based) in each electron
    manifold: h(m_s) = (m_s A_zx, m_s A_zy, -nu_n + m_s A_zz), in MHz.

    The angle between the two axes is what anisotropic coupling buys: 0 or pi
    means the nuclear quantization axis is electron-independent (up to sign)
    and electron-driven nuclear control is lost.
    """
    if not 1 <= nucleus <= sys.n_nuclei:
        raise ValueError(f"nucleus index {nucleus} out of range")
    nuc = sys.nuclei[nucleus - 1]

    def h_eff(ms: float) -> np.ndarray:
        return np.array([ms * nuc.a_zx_mhz,
                         ms * nuc.a_zy_mhz,
                         -nuc.zeeman_freq_mhz + ms * nuc.a_zz_mhz])

    up, down = h_eff(0.5), h_eff(-0.5)
    nu, nd = np.linalg.norm(up), np.linalg.norm(down)
    if nu == 0.0 or nd == 0.0:
        angle = 0.0  # a zero field carries no axis; report alignment
    else:
        cosang = float(np.clip(np.dot(up, down) / (nu * nd), -1.0, 1.0))
        angle = float(np.arccos(cosang))
    return QuantizationAxes(tuple(up), tuple(down), angle)


def default_carrier_mhz(sys: SpinSystem) -> float:
    """Microwave carrier resonant with the outermost electron transition
    (level 1 to level dim), the customary working point.
    """
    eigs = system_eigensystem(sys)
    return eigs.transition_freq_mhz(1, eigs.dim)
