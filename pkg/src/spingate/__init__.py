"""spingate: electron-nuclear spin systems with anisotropic hyperfine
coupling -- controllability analysis, GRAPE microwave pulse synthesis and
simulated Ramsey/Hahn experiments."""

from .config import ConfigError, builtin_config_path, load_system, parse_system_config, resolve_config
from .controllability import (
    ControlGraph,
    UniversalityVerdict,
    build_control_graph,
    check_strong_regularity,
    graph_edge_list,
    is_universal,
)
from .experiments import (
    Delay,
    ExperimentTrace,
    Gate,
    Pulse,
    Schedule,
    SweptDelay,
    bloch_projection,
    detection_echo_signal,
    dominant_frequency,
    echo_signal,
    evolve,
    hahn_experiment,
    ramsey_experiment,
    thermal_state,
)
from .grape import GrapeConfig, OptimizationReport, grape_optimize, random_pulse
from .operators import build_operators, pair_sigma, subspace_rotation
from .pulses import (
    PulseSequence,
    control_frame,
    fidelity_gradient,
    gate_fidelity,
    parse_pulse,
    propagate,
    q_filter,
    read_pulse_file,
    rotating_frame_hamiltonian,
    serialize_pulse,
    slice_hamiltonian,
    uniform_pulse,
    write_pulse_file,
)
from .spinsys import (
    EigenStructure,
    FullSystemSpec,
    NucleusSpec,
    QuantizationAxes,
    SpinSystem,
    build_full_hamiltonian,
    build_secular_hamiltonian,
    default_carrier_mhz,
    eigensystem,
    quantization_axes,
    system_eigensystem,
    to_secular,
    transition_table,
)
from .targets import NAMED_TARGETS, named_target

__version__ = "0.1.0"
