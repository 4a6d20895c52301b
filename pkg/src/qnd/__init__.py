"""Information-theoretic noise and disturbance of quantum instruments."""

from .core import (
    CompletenessError,
    CpMap,
    DimensionError,
    Isometry,
    Observable,
    QuantumInstrument,
    apply_cp_map,
    density_operator,
    discard_flag,
    fidelity,
    infinity_norm,
    instrument_channel,
    ket,
    kron,
    maximally_entangled,
    partial_trace,
    stinespring_dilate,
)
from .disturbance import (
    CheckResult,
    DegenerateObservableError,
    DisturbanceBracket,
    GuessPovm,
    degenerate_noise,
    disturbance_given_guess,
    fano_check,
    fidelity_error_identity,
    joint_noise_check,
    memory_eur_check,
    noise,
    noise_table,
    optimize_disturbance,
    overlap_constant,
    overlap_constant_degenerate,
    petz_correction,
    pgm_guess,
    quantum_lower_bound,
    ricochet_equivalence,
    theorem1_check,
)
from .harness import AnalysisReport, analyze, sweep, verify
from .info import (
    JointTable,
    binary_entropy,
    conditional_entropy,
    entropy_variance_bound,
    fano_bounds,
    lattice_spacing,
    quantum_conditional_entropy,
    shannon_entropy,
    von_neumann_entropy,
)
from .io import SchemaError, load_instrument, load_observable, save_instrument, save_observable
from .msd import (
    EstimatorMap,
    conditional_mean,
    map_guess,
    msd_tradeoff_check,
    ozawa_epsilon_sq,
    ozawa_eta_sq,
    v_disturbance,
    v_noise,
)
from .zoo import (
    luders,
    noisy_luders,
    pauli_observable,
    random_basis_pair,
    random_channel,
    random_instrument,
    trivial_instrument,
    weak_measurement,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "CheckResult",
    "CompletenessError",
    "CpMap",
    "DegenerateObservableError",
    "DimensionError",
    "DisturbanceBracket",
    "EstimatorMap",
    "GuessPovm",
    "Isometry",
    "JointTable",
    "Observable",
    "QuantumInstrument",
    "SchemaError",
    "analyze",
    "apply_cp_map",
    "binary_entropy",
    "conditional_entropy",
    "conditional_mean",
    "degenerate_noise",
    "density_operator",
    "discard_flag",
    "disturbance_given_guess",
    "entropy_variance_bound",
    "fano_bounds",
    "fano_check",
    "fidelity",
    "fidelity_error_identity",
    "infinity_norm",
    "instrument_channel",
    "joint_noise_check",
    "ket",
    "kron",
    "lattice_spacing",
    "load_instrument",
    "load_observable",
    "luders",
    "map_guess",
    "maximally_entangled",
    "memory_eur_check",
    "msd_tradeoff_check",
    "noise",
    "noise_table",
    "noisy_luders",
    "optimize_disturbance",
    "overlap_constant",
    "overlap_constant_degenerate",
    "ozawa_epsilon_sq",
    "ozawa_eta_sq",
    "partial_trace",
    "pauli_observable",
    "petz_correction",
    "pgm_guess",
    "quantum_conditional_entropy",
    "quantum_lower_bound",
    "random_basis_pair",
    "random_channel",
    "random_instrument",
    "ricochet_equivalence",
    "save_instrument",
    "save_observable",
    "shannon_entropy",
    "stinespring_dilate",
    "sweep",
    "theorem1_check",
    "trivial_instrument",
    "v_disturbance",
    "v_noise",
    "verify",
    "von_neumann_entropy",
    "weak_measurement",
]
