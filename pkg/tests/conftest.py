import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

import spingate as sg

# Canonical 1e-1n parameters (malonic acid radical at X band), MHz.
MALONIC = dict(nu_s=11885.0, nu_n=18.1, a_zx=14.2, a_zz=-42.7)
CARRIER_MHZ = 11909.0
MAX_RABI_MHZ = 7.0


@pytest.fixture(scope="session")
def malonic() -> sg.SpinSystem:
    return sg.SpinSystem(MALONIC["nu_s"], (sg.NucleusSpec(
        MALONIC["nu_n"], MALONIC["a_zx"], 0.0, MALONIC["a_zz"]),))


@pytest.fixture(scope="session")
def isotropic() -> sg.SpinSystem:
    return sg.SpinSystem(MALONIC["nu_s"], (sg.NucleusSpec(
        MALONIC["nu_n"], 0.0, 0.0, MALONIC["a_zz"]),))


@pytest.fixture(scope="session")
def two_nuclei() -> sg.SpinSystem:
    """Proton plus a representative (not fitted) 13C row; see the packaged
    malonic_acid_13c.cfg."""
    return sg.SpinSystem(MALONIC["nu_s"], (
        sg.NucleusSpec(MALONIC["nu_n"], MALONIC["a_zx"], 0.0, MALONIC["a_zz"]),
        sg.NucleusSpec(4.553, 9.1, 0.0, 31.5),
    ))


@pytest.fixture(scope="session")
def optimized(malonic):
    """GRAPE pulses for the standard gate set, shared across the suite.

    Returns {name: (report, target, elapsed_seconds)}.
    """
    runs = {
        "u_pc": (sg.named_target(malonic, "u_pc"), 200, 0.98),
        "u_pc_inv": (sg.named_target(malonic, "u_pc").conj().T, 200, 0.98),
        "u_r": (sg.named_target(malonic, "u_r"), 130, 0.97),
        "swap_en": (sg.named_target(malonic, "swap_en"), 420, 0.99),
    }
    out = {}
    for name, (target, slices, goal) in runs.items():
        cfg = sg.GrapeConfig(target=target, max_iterations=300, restarts=8,
                             fidelity_goal=goal, seed=2026)
        init = sg.random_pulse(np.random.default_rng(0), CARRIER_MHZ,
                               MAX_RABI_MHZ, slices, 4.0)
        t0 = time.monotonic()
        report = sg.grape_optimize(malonic, cfg, init)
        out[name] = (report, target, time.monotonic() - t0)
    return out
