"""Spin-strain and spin-stress coupling of C3v defect qubits.

Spin-1 deformation Hamiltonian, elastic tensors and their frame rotation,
h <-> g coupling conversion, least-squares extraction of couplings from
zero-field-splitting data, and shot-noise-limited stress sensitivity.
"""

__version__ = "0.1.0"

from .conversion import ConversionReport, strain_to_stress_couplings, stress_to_strain_couplings
from .elasticity import (
    ComplianceMatrix,
    DefectFrame,
    StiffnessMatrix,
    StrainTensor,
    StressTensor,
    compliance,
    cubic_111_frames,
    rotate_stiffness,
    rotate_stiffness_tensor,
    stiffness_cubic,
    stiffness_hexagonal,
    strain_from_stress,
    stress_from_strain,
)
from .exceptions import (
    ContractError,
    IdentifiabilityError,
    NumericalError,
    SpinStressError,
    SymmetryError,
    ValidationError,
)
from .presets import MaterialPreset, list_presets, load_material, load_scenarios
from .regression import (
    FitResult,
    ZfsCouplingRegressor,
    ZfsSample,
    default_strain_battery,
    design_row,
    fit,
    generate_synthetic,
    load_dataset,
)
from .sensitivity import ReadoutScenario, SensitivityResult, contrast, eta, scenario_table
from .spin import (
    ChannelCoefficients,
    CouplingSet,
    build_hamiltonian,
    decompose_zfs,
    reassemble_zfs,
    spin_matrices,
    strain_hamiltonian_coefficients,
    transition_shifts,
)
