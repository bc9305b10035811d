"""Conversion between spin-strain (h) and spin-stress (g) coupling sets.

The map is built numerically.  Each unit load is pushed through the
compliance (or stiffness), the resulting channel pattern is computed with
the source couplings, and the target couplings are found by least squares
against the same C3v form written in the other variable.  With 6 loads and
5 channels that is 30 equations for 6 unknowns, so the residual tells
whether the elastic tensor actually has the symmetry the coupling form
assumes in the chosen frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import StrainTensor, StressTensor, compliance
from .exceptions import ContractError, SymmetryError
from .spin import CouplingSet, coupling_block

__all__ = [
    "RESIDUAL_TOLERANCE",
    "ConversionReport",
    "strain_to_stress_map",
    "stress_to_strain_map",
    "strain_to_stress_couplings",
    "stress_to_strain_couplings",
]

RESIDUAL_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ConversionReport:
    """Result of a coupling conversion.

    Attributes
    ----------
    source, target : CouplingSet
        Input couplings and converted couplings.
    linear_map : ndarray, shape (6, 6)
        ``target.values = linear_map @ source.values``.  GPa^-1 for h -> g.
    residual : float
        Largest misfit of the symmetry-constrained solve, relative to the
        largest channel entry.  Roundoff-sized for a C3v-compatible frame.
    """

    source: CouplingSet
    target: CouplingSet
    linear_map: np.ndarray
    residual: float

    @property
    def g(self):
        return self.target if self.target.kind == "stress" else self.source

    @property
    def h(self):
        return self.target if self.target.kind == "strain" else self.source


def _solve_pattern(form_tensors, response_tensors):
    a = np.vstack([coupling_block(t) for t in form_tensors])
    b = np.vstack([coupling_block(t) for t in response_tensors])
    m, *_ = np.linalg.lstsq(a, b, rcond=None)
    scale = np.abs(b).max()
    residual = float(np.abs(a @ m - b).max() / scale) if scale > 0 else 0.0
    return m, residual


def _require_defect_frame(c):
    if c.frame != "defect":
        raise ContractError(
            "stiffness matrix must be expressed in the defect frame; rotate it with rotate_stiffness first"
        )


def strain_to_stress_map(c_defect):
    """6x6 map h -> g (GPa^-1) and its symmetry residual."""
    _require_defect_frame(c_defect)
    s = compliance(c_defect)
    stresses = [StressTensor.from_voigt(v) for v in np.eye(6)]
    strains = [StrainTensor.from_voigt(s.matrix @ sig.voigt) for sig in stresses]
    return _solve_pattern(stresses, strains)


def stress_to_strain_map(c_defect):
    """6x6 map g -> h (GPa) and its symmetry residual."""
    _require_defect_frame(c_defect)
    # condition check shared with the forward direction
    compliance(c_defect)
    strains = [StrainTensor.from_voigt(v) for v in np.eye(6)]
    stresses = [StressTensor.from_voigt(c_defect.matrix @ eps.voigt) for eps in strains]
    return _solve_pattern(strains, stresses)


def _propagate(linear_map, errors):
    return np.sqrt((linear_map**2) @ (errors**2))


def _convert(source, linear_map, residual, target_kind, check):
    target = CouplingSet(linear_map @ source.values, _propagate(linear_map, source.errors), target_kind)
    report = ConversionReport(source, target, linear_map, residual)
    if check and residual > RESIDUAL_TOLERANCE:
        raise SymmetryError(
            f"stiffness matrix incompatible with C3v form in this frame (residual {residual:.3g})",
            residual=residual,
            report=report,
        )
    return report


def strain_to_stress_couplings(h, c_defect, check=True):
    """Convert spin-strain couplings to spin-stress couplings.

    Parameters
    ----------
    h : CouplingSet
        Strain couplings in MHz/strain.
    c_defect : StiffnessMatrix
        Stiffness in the defect frame.
    check : bool, default=True
        Raise :class:`SymmetryError` when the residual exceeds
        :data:`RESIDUAL_TOLERANCE`.  With ``check=False`` the report is
        returned regardless, so the residual can be inspected.

    Returns
    -------
    ConversionReport
        Errors on g assume independent errors on h.
    """
    if h.kind != "strain":
        raise ContractError("strain_to_stress_couplings expects strain couplings (h)")
    linear_map, residual = strain_to_stress_map(c_defect)
    return _convert(h, linear_map, residual, "stress", check)


def stress_to_strain_couplings(g, c_defect, check=True):
    """Inverse of :func:`strain_to_stress_couplings`."""
    if g.kind != "stress":
        raise ContractError("stress_to_strain_couplings expects stress couplings (g)")
    linear_map, residual = stress_to_strain_map(c_defect)
    return _convert(g, linear_map, residual, "strain", check)
