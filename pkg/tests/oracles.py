"""Independent reference implementations used only by the tests.

Everything here is deliberately built on a different route than the library
code it checks: matrix elements come from bit arithmetic on basis indices
instead of Kronecker products, manifold physics from explicit 2x2 algebra,
propagation from an adaptive ODE integrator in the lab frame, and
controllability from an explicit Lie-algebra closure.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

_SINGLE = {
    "1": np.eye(2, dtype=complex),
    "x": np.array([[0, 0.5], [0.5, 0]], dtype=complex),
    "y": np.array([[0, -0.5j], [0.5j, 0]], dtype=complex),
    "z": np.array([[0.5, 0], [0, -0.5]], dtype=complex),
}


def bit_of(index: int, slot: int, n_spins: int) -> int:
    """Bit of basis index ``index`` at ``slot`` (0 = electron, most significant)."""
    return (index >> (n_spins - 1 - slot)) & 1


def product_op_element(letters: dict[int, str], i: int, j: int, n_spins: int) -> complex:
    """<i| O |j> for O a product of single-spin operators, one letter per slot
    (missing slots are identity), computed from bits alone."""
    val = 1.0 + 0.0j
    for slot in range(n_spins):
        m = _SINGLE[letters.get(slot, "1")]
        val *= m[bit_of(i, slot, n_spins), bit_of(j, slot, n_spins)]
        if val == 0.0:
            return 0.0j
    return val


def product_op(letters: dict[int, str], n_spins: int) -> np.ndarray:
    dim = 2**n_spins
    out = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out[i, j] = product_op_element(letters, i, j, n_spins)
    return out


def secular_hamiltonian_oracle(electron_freq_mhz, nuclei) -> np.ndarray:
    """Brute-force secular Hamiltonian (rad/us) from bitwise product elements.

    ``nuclei`` is a sequence of (zeeman, a_zx, a_zy, a_zz) in MHz.
    """
    n_spins = 1 + len(nuclei)
    dim = 2**n_spins
    h = electron_freq_mhz * product_op({0: "z"}, n_spins)
    for k, (nu_n, a_zx, a_zy, a_zz) in enumerate(nuclei, start=1):
        h = h - nu_n * product_op({k: "z"}, n_spins)
        h = h + a_zx * product_op({0: "z", k: "x"}, n_spins)
        h = h + a_zy * product_op({0: "z", k: "y"}, n_spins)
        h = h + a_zz * product_op({0: "z", k: "z"}, n_spins)
    return 2.0 * np.pi * h


def manifold_splittings(nu_n, a_zx, a_zy, a_zz) -> tuple[float, float]:
    """Closed-form nuclear splittings (MHz) of the m_s = -1/2 and +1/2
    manifolds of a 1e-1n secular system."""
    perp_sq = (a_zx**2 + a_zy**2) / 4.0
    low = np.sqrt((nu_n + a_zz / 2.0) ** 2 + perp_sq)   # m_s = -1/2
    high = np.sqrt((nu_n - a_zz / 2.0) ** 2 + perp_sq)  # m_s = +1/2
    return float(low), float(high)


def manifold_nuclear_hamiltonian(ms, nu_n, a_zx, a_zy, a_zz) -> np.ndarray:
    """2x2 nuclear Hamiltonian (MHz, linear) within electron manifold ms."""
    hx, hy, hz = ms * a_zx, ms * a_zy, -nu_n + ms * a_zz
    return 0.5 * np.array([[hz, hx - 1j * hy], [hx + 1j * hy, -hz]])


def lab_frame_propagator(h0_rad, s_x, s_y, carrier_mhz, max_rabi_mhz,
                         slices, rtol=1e-10, atol=1e-12) -> np.ndarray:
    """Integrate dU/dt = -i H_lab(t) U with the explicitly time-dependent
    circularly polarized drive (no rotating-frame transformation).

    ``slices`` is a sequence of (duration_us, amplitude, phase_rad).
    """
    dim = h0_rad.shape[0]
    w_c = 2.0 * np.pi * carrier_mhz
    w_1 = 2.0 * np.pi * max_rabi_mhz

    u = np.eye(dim, dtype=complex)
    t_start = 0.0
    for dur, amp, phase in slices:
        def rhs(t, y):
            arg = w_c * t + phase
            h = h0_rad + w_1 * amp * (np.cos(arg) * s_x + np.sin(arg) * s_y)
            return (-1j * h @ y.reshape(dim, dim)).ravel()

        sol = solve_ivp(rhs, (t_start, t_start + dur), u.ravel(),
                        rtol=rtol, atol=atol, method="DOP853")
        u = sol.y[:, -1].reshape(dim, dim)
        t_start += dur
    return u


def lie_algebra_rank(generators, tol=1e-7, max_dim=None) -> int:
    """Dimension of the real Lie algebra generated by anti-Hermitian
    matrices, via repeated commutators and Gram-Schmidt."""
    def vec(a):
        return np.concatenate([a.real.ravel(), a.imag.ravel()])

    basis_mats: list[np.ndarray] = []
    basis_vecs: list[np.ndarray] = []

    def add(a):
        v = vec(a)
        for _ in range(2):  # double orthogonalization keeps the basis clean
            for b in basis_vecs:
                v = v - np.dot(v, b) * b
        norm = np.linalg.norm(v)
        if norm <= tol:
            return False
        basis_vecs.append(v / norm)
        # re-normalize the matrix consistently for further commutators
        basis_mats.append(a / np.linalg.norm(vec(a)))
        return True

    queue = []
    for g in generators:
        if add(g / np.linalg.norm(vec(g))):
            queue.append(basis_mats[-1])

    dim_cap = max_dim or 10**9
    while queue and len(basis_mats) < dim_cap:
        a = queue.pop()
        for b in list(basis_mats):
            c = a @ b - b @ a
            if np.linalg.norm(vec(c)) > tol and add(c):
                queue.append(basis_mats[-1])
    return len(basis_mats)


def fit_single_cosine(t, y, freq_mhz):
    """Least-squares fit y ~ a + b cos(2 pi f t) + c sin(2 pi f t) at a known
    frequency; returns (fitted, residual_rms, amplitude)."""
    w = 2.0 * np.pi * freq_mhz
    design = np.column_stack([np.ones_like(t), np.cos(w * t), np.sin(w * t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    resid = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return fitted, resid, float(np.hypot(coef[1], coef[2]))
