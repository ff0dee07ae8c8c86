import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import spingate as sg
from spingate.operators import build_operators, hermiticity_defect
from spingate.spinsys import BOHR_MAGNETON_MHZ_PER_T, TWO_PI

from conftest import MALONIC
from oracles import manifold_nuclear_hamiltonian, manifold_splittings, secular_hamiltonian_oracle

finite_freq = st.floats(0.1, 100.0)
coupling = st.floats(-60.0, 60.0)


def test_system_invariants():
    sys_ = sg.SpinSystem(100.0, (sg.NucleusSpec(1.0),) * 3)
    assert sys_.dim == 16 and sys_.n_nuclei == 3
    with pytest.raises(ValueError):
        sg.SpinSystem(-5.0)
    with pytest.raises(ValueError):
        sg.SpinSystem(100.0, (sg.NucleusSpec(1.0),) * 13)
    assert sg.NucleusSpec(1.0, 0.5).anisotropic
    assert not sg.NucleusSpec(1.0, 0.0, 0.0, 3.0).anisotropic


def test_malonic_splittings_closed_form(malonic):
    eigs = sg.system_eigensystem(malonic)
    low, high = manifold_splittings(MALONIC["nu_n"], MALONIC["a_zx"], 0.0,
                                    MALONIC["a_zz"])
    assert eigs.transition_freq_mhz(1, 2) == pytest.approx(low, rel=1e-9)
    assert eigs.transition_freq_mhz(3, 4) == pytest.approx(high, rel=1e-9)
    # the canonical numbers themselves
    assert eigs.transition_freq_mhz(1, 2) == pytest.approx(7.8, abs=0.15)
    assert eigs.transition_freq_mhz(3, 4) == pytest.approx(40.0, abs=0.15)


@settings(max_examples=25, deadline=None)
@given(nu_s=st.floats(100.0, 20000.0), nu_n=finite_freq, a_zx=coupling,
       a_zy=coupling, a_zz=coupling)
def test_splitting_closed_form_any_1e1n(nu_s, nu_n, a_zx, a_zy, a_zz):
    sys_ = sg.SpinSystem(nu_s, (sg.NucleusSpec(nu_n, a_zx, a_zy, a_zz),))
    eigs = sg.system_eigensystem(sys_)
    low, high = manifold_splittings(nu_n, a_zx, a_zy, a_zz)
    got = sorted([eigs.transition_freq_mhz(1, 2), eigs.transition_freq_mhz(3, 4)])
    assert got[0] == pytest.approx(min(low, high), rel=1e-9, abs=1e-9)
    assert got[1] == pytest.approx(max(low, high), rel=1e-9, abs=1e-9)


def test_secular_matches_bitwise_oracle_1e2n():
    rng = np.random.default_rng(42)
    for _ in range(5):
        nuclei = [(abs(z), ax, ay, az)
                  for z, ax, ay, az in (rng.uniform(-50, 50, 4) for _ in range(2))]
        sys_ = sg.SpinSystem(11885.0, tuple(
            sg.NucleusSpec(z, ax, ay, az) for z, ax, ay, az in nuclei))
        h = sg.build_secular_hamiltonian(sys_)
        oracle = secular_hamiltonian_oracle(11885.0, nuclei)
        assert np.max(np.abs(h - oracle)) < 1e-12 * max(1.0, np.max(np.abs(oracle)))


def test_secular_hermitian_and_commutes_with_sz(malonic, two_nuclei):
    for sys_ in (malonic, two_nuclei):
        h = sg.build_secular_hamiltonian(sys_)
        assert hermiticity_defect(h) <= 1e-12 * np.max(np.abs(h))
        s_z = build_operators(sys_.n_nuclei)["S_z"]
        comm = h @ s_z - s_z @ h
        assert np.max(np.abs(comm)) <= 1e-12 * np.max(np.abs(h))


def test_zero_couplings_pure_zeeman():
    sys_ = sg.SpinSystem(1000.0, (sg.NucleusSpec(0.0),))
    evals = np.sort(np.linalg.eigvalsh(sg.build_secular_hamiltonian(sys_)))
    # +-pi*nu_s, doubly degenerate (rad/us)
    assert np.allclose(evals, [-np.pi * 1000] * 2 + [np.pi * 1000] * 2)


def test_eigen_round_trip(two_nuclei):
    h = sg.build_secular_hamiltonian(two_nuclei)
    eigs = sg.eigensystem(h, two_nuclei)
    v = eigs.states
    recon = v @ np.diag(TWO_PI * eigs.energies_mhz) @ v.conj().T
    assert np.max(np.abs(recon - h)) <= 1e-9 * np.max(np.abs(h))
    assert np.max(np.abs(v.conj().T @ v - np.eye(8))) < 1e-10


def test_labeling_manifolds(malonic):
    eigs = sg.system_eigensystem(malonic)
    assert list(eigs.level_manifold) == [-0.5, -0.5, 0.5, 0.5]
    # levels 1,2 are the small-splitting manifold; energies ascend within it
    e = eigs.level_energies_mhz
    assert e[0] < e[1] < e[2] < e[3]
    # manifold character is definite for a secular Hamiltonian
    basis = eigs.level_basis
    p_up = np.sum(np.abs(basis[:2, :]) ** 2, axis=0)
    assert np.allclose(p_up, [0, 0, 1, 1], atol=1e-12)


def test_mixing_angle_vs_2x2_oracle(malonic):
    eigs = sg.system_eigensystem(malonic)
    # lower manifold (levels 1,2) nuclear part lives in the bottom-right block
    for ms, levels in ((-0.5, (1, 2)), (0.5, (3, 4))):
        h2 = manifold_nuclear_hamiltonian(ms, MALONIC["nu_n"], MALONIC["a_zx"],
                                          0.0, MALONIC["a_zz"])
        _, vecs = np.linalg.eigh(h2)
        rows = slice(2, 4) if ms < 0 else slice(0, 2)
        for i, lvl in enumerate(levels):
            state = eigs.level_basis[rows, lvl - 1]
            overlap = abs(np.vdot(vecs[:, i], state))
            assert overlap == pytest.approx(1.0, abs=1e-10)


def test_isotropic_eigenvectors_are_product_states(isotropic):
    eigs = sg.system_eigensystem(isotropic)
    # each eigenvector has a single nonzero component (Zeeman product state)
    for col in eigs.level_basis.T:
        mags = np.sort(np.abs(col))[::-1]
        assert mags[0] == pytest.approx(1.0, abs=1e-12)
        assert mags[1] < 1e-12


def test_transition_table_malonic(malonic):
    rows = sg.transition_table(sg.system_eigensystem(malonic))
    elems = {(j, k): e for j, k, _, e in rows}
    assert elems[(1, 2)] < 1e-12 and elems[(3, 4)] < 1e-12
    for pair in ((1, 3), (1, 4), (2, 3), (2, 4)):
        assert elems[pair] > 0.1
    freqs = {(j, k): f for j, k, f, _ in rows}
    # level arithmetic: outer pair sum equals inner pair sum
    assert freqs[(1, 4)] - freqs[(2, 3)] == pytest.approx(
        freqs[(1, 2)] + freqs[(3, 4)], rel=1e-12)


def test_transition_table_isotropic(isotropic):
    rows = sg.transition_table(sg.system_eigensystem(isotropic))
    nonzero = [(j, k) for j, k, _, e in rows if e > 1e-10]
    assert len(nonzero) == 2


def test_quantization_axes(malonic):
    axes = sg.quantization_axes(malonic, 1)
    up = np.array(axes.field_up_mhz)
    down = np.array(axes.field_down_mhz)
    assert np.allclose(up, [7.1, 0.0, -18.1 - 21.35])
    assert np.allclose(down, [-7.1, 0.0, -18.1 + 21.35])
    cosang = up @ down / (np.linalg.norm(up) * np.linalg.norm(down))
    assert axes.angle_rad == pytest.approx(np.arccos(cosang), abs=1e-12)
    assert 0.0 < axes.angle_rad < np.pi


def test_quantization_axes_degenerate_cases():
    iso = sg.SpinSystem(1000.0, (sg.NucleusSpec(18.1, 0.0, 0.0, -42.7),))
    axes = sg.quantization_axes(iso, 1)
    assert abs(axes.field_up_mhz[0]) == 0.0
    assert axes.angle_rad in (0.0,) or axes.angle_rad == pytest.approx(np.pi)
    # pure transverse coupling: antiparallel along +-x
    trans = sg.SpinSystem(1000.0, (sg.NucleusSpec(0.0, 10.0, 0.0, 0.0),))
    axes = sg.quantization_axes(trans, 1)
    assert axes.angle_rad == pytest.approx(np.pi)
    assert axes.field_up_mhz[0] == pytest.approx(5.0)
    with pytest.raises(ValueError):
        sg.quantization_axes(trans, 2)


def test_degenerate_labeling_flagged():
    bare = sg.SpinSystem(1000.0, (sg.NucleusSpec(0.0),))
    eigs = sg.system_eigensystem(bare)
    assert eigs.degenerate_pairs


def test_full_hamiltonian_secular_limit(malonic):
    b0 = 0.42435531  # tesla; some field
    g_zz = malonic.electron_freq_mhz / (BOHR_MAGNETON_MHZ_PER_T * b0)
    gamma = MALONIC["nu_n"] / b0
    a_full = np.zeros((1, 3, 3))
    a_full[0, 2] = [MALONIC["a_zx"], 0.0, MALONIC["a_zz"]]
    spec = sg.FullSystemSpec(
        g_tensor=np.diag([2.0, 2.0, g_zz]),
        b_field_t=np.array([0.0, 0.0, b0]),
        gyromagnetic_mhz_per_t=(gamma,),
        hyperfine_tensors_mhz=a_full,
    )
    h_full = sg.build_full_hamiltonian(spec)
    h_sec = sg.build_secular_hamiltonian(sg.to_secular(spec))
    assert np.max(np.abs(h_full - h_sec)) < 1e-7
    assert np.max(np.abs(h_sec - sg.build_secular_hamiltonian(malonic))) < 1e-6


def test_full_hamiltonian_zeeman_only():
    spec = sg.FullSystemSpec(
        g_tensor=np.diag([2.0, 2.0, 2.0]),
        b_field_t=np.array([0.0, 0.0, 0.5]),
        gyromagnetic_mhz_per_t=(42.577,),
        hyperfine_tensors_mhz=np.zeros((1, 3, 3)),
    )
    evals = np.sort(np.linalg.eigvalsh(sg.build_full_hamiltonian(spec))) / TWO_PI
    nu_e = 2.0 * BOHR_MAGNETON_MHZ_PER_T * 0.5
    nu_n = 42.577 * 0.5
    expected = np.sort([(se * nu_e - sn * nu_n) / 2
                        for se in (-1, 1) for sn in (-1, 1)])
    assert np.allclose(evals, expected, atol=1e-9)


def test_full_hamiltonian_anisotropic_difference_is_nonsecular(malonic):
    # add electron x/y hyperfine rows; the difference from the secular build
    # must live entirely in S_x/S_y electron terms (zero diagonal blocks in
    # the electron basis ordering)
    b0 = 0.42435531
    g_zz = malonic.electron_freq_mhz / (BOHR_MAGNETON_MHZ_PER_T * b0)
    a_full = np.array([[[21.0, 0.0, 3.0], [0.0, 17.0, 0.0],
                        [MALONIC["a_zx"], 0.0, MALONIC["a_zz"]]]])
    spec = sg.FullSystemSpec(
        g_tensor=np.diag([g_zz, g_zz, g_zz]),
        b_field_t=np.array([0.0, 0.0, b0]),
        gyromagnetic_mhz_per_t=(MALONIC["nu_n"] / b0,),
        hyperfine_tensors_mhz=a_full,
    )
    diff = sg.build_full_hamiltonian(spec) - sg.build_secular_hamiltonian(
        sg.to_secular(spec))
    # S_x/S_y electron operators are purely block-off-diagonal
    assert np.max(np.abs(diff[:2, :2])) < 1e-12
    assert np.max(np.abs(diff[2:, 2:])) < 1e-12
    assert np.max(np.abs(diff)) > 1.0


def test_full_hamiltonian_rejects_bad_dipole():
    d = np.zeros((2, 2, 3, 3))
    d[0, 1, 0, 1] = 1.0  # not matching transpose of d[1,0]
    with pytest.raises(ValueError):
        sg.FullSystemSpec(
            g_tensor=np.eye(3) * 2, b_field_t=np.array([0, 0, 0.5]),
            gyromagnetic_mhz_per_t=(42.0, 11.0),
            hyperfine_tensors_mhz=np.zeros((2, 3, 3)),
            dipole_tensors_mhz=d,
        )


def test_dipole_term_prefactor():
    # one ordered pair contributes D/2 each way: total D * I1.I2 coupling
    d = np.zeros((2, 2, 3, 3))
    d[0, 1, 2, 2] = 8.0
    d[1, 0, 2, 2] = 8.0
    spec = sg.FullSystemSpec(
        g_tensor=np.eye(3) * 2, b_field_t=np.array([0, 0, 0.5]),
        gyromagnetic_mhz_per_t=(0.0, 0.0),
        hyperfine_tensors_mhz=np.zeros((2, 3, 3)),
        dipole_tensors_mhz=d,
    )
    h = sg.build_full_hamiltonian(spec)
    ops = build_operators(2)
    expected = (2 * BOHR_MAGNETON_MHZ_PER_T * 0.5 * 2 * np.pi * ops["S_z"]
                + 8.0 * 2 * np.pi * ops["I_z^1"] @ ops["I_z^2"])
    assert np.max(np.abs(h - expected)) < 1e-9
