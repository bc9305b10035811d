"""Elastic tensors in Voigt notation and their frame transformations.

Voigt order is (xx, yy, zz, yz, zx, xy) throughout.  Strain vectors carry
engineering shears (2*eps_yz, 2*eps_zx, 2*eps_xy); stress vectors do not.
Stiffness entries are in GPa, compliance entries in 1/GPa.

Two rotation routes are provided: :func:`rotate_stiffness` uses the 6x6 Bond
matrix, :func:`rotate_stiffness_tensor` sums the rank-4 transformation over
every index.  Tests keep them in agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError, NumericalError, ValidationError

__all__ = [
    "VOIGT_PAIRS",
    "StrainTensor",
    "StressTensor",
    "StiffnessMatrix",
    "ComplianceMatrix",
    "DefectFrame",
    "cubic_111_frames",
    "stiffness_cubic",
    "stiffness_hexagonal",
    "voigt_to_tensor",
    "tensor_to_voigt",
    "bond_matrix",
    "rotate_stiffness",
    "rotate_stiffness_tensor",
    "compliance",
    "strain_from_stress",
    "stress_from_strain",
]

VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
COMPONENT_NAMES = ("xx", "yy", "zz", "yz", "zx", "xy")

_SYMMETRY_RTOL = 1e-9
_MAX_CONDITION = 1e12


def _symmetric_from_components(components, shear_factor=1.0):
    xx, yy, zz, yz, zx, xy = (float(c) for c in components)
    yz, zx, xy = shear_factor * yz, shear_factor * zx, shear_factor * xy
    return np.array([[xx, xy, zx], [xy, yy, yz], [zx, yz, zz]])


class _SymmetricTensor:
    """Shared behaviour of strain and stress tensors."""

    matrix: np.ndarray
    frame: str

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValidationError(f"expected a 3x3 tensor, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("tensor entries must be finite")
        if not np.allclose(m, m.T, rtol=1e-12, atol=1e-15):
            raise ValidationError("tensor must be symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_components(cls, xx=0.0, yy=0.0, zz=0.0, yz=0.0, zx=0.0, xy=0.0, frame="defect"):
        """Build from the six independent tensor components."""
        return cls(_symmetric_from_components((xx, yy, zz, yz, zx, xy)), frame=frame)

    @classmethod
    def zero(cls, frame="defect"):
        return cls(np.zeros((3, 3)), frame=frame)

    @property
    def components(self):
        """Tensor components (xx, yy, zz, yz, zx, xy), no shear factors."""
        return np.array([self.matrix[i, j] for i, j in VOIGT_PAIRS])

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other.frame != self.frame:
            raise ContractError(f"cannot add tensors in frames {self.frame!r} and {other.frame!r}")
        return type(self)(self.matrix + other.matrix, frame=self.frame)

    def __mul__(self, scale):
        return type(self)(float(scale) * self.matrix, frame=self.frame)

    __rmul__ = __mul__

    def rotated(self, rotation):
        """Express the tensor in the frame reached by ``rotation`` (rows = new axes)."""
        r = np.asarray(rotation, dtype=float)
        return type(self)(r @ self.matrix @ r.T, frame=self.frame)


@dataclass(frozen=True, eq=False)
class StrainTensor(_SymmetricTensor):
    """Symmetric, dimensionless strain.  Negative diagonal entries are compressive."""

    matrix: np.ndarray
    frame: str = "defect"

    @classmethod
    def from_voigt(cls, vector, frame="defect"):
        """Build from an engineering Voigt vector (shears are 2*eps_ij)."""
        v = np.asarray(vector, dtype=float)
        if v.shape != (6,):
            raise ValidationError("Voigt strain must have six entries")
        return cls(_symmetric_from_components(v, shear_factor=0.5), frame=frame)

    @property
    def voigt(self):
        v = self.components
        v[3:] *= 2.0
        return v


@dataclass(frozen=True, eq=False)
class StressTensor(_SymmetricTensor):
    """Symmetric stress in GPa."""

    matrix: np.ndarray
    frame: str = "defect"

    @classmethod
    def from_voigt(cls, vector, frame="defect"):
        v = np.asarray(vector, dtype=float)
        if v.shape != (6,):
            raise ValidationError("Voigt stress must have six entries")
        return cls(_symmetric_from_components(v), frame=frame)

    @property
    def voigt(self):
        return self.components


def _check_square6(m, what):
    m = np.array(m, dtype=float)
    if m.shape != (6, 6):
        raise ValidationError(f"{what} must be 6x6, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{what} entries must be finite")
    scale = np.abs(m).max() or 1.0
    if np.abs(m - m.T).max() > _SYMMETRY_RTOL * scale:
        raise ValidationError(f"{what} must be symmetric")
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class StiffnessMatrix:
    """6x6 Voigt stiffness in GPa, tagged with its frame and symmetry class."""

    matrix: np.ndarray
    frame: str = "crystal"
    symmetry_class: str = "general"

    def __post_init__(self):
        m = _check_square6(self.matrix, "stiffness matrix")
        eigenvalues = np.linalg.eigvalsh(m)
        if eigenvalues.min() <= 0:
            raise ValidationError(
                f"stiffness matrix is not positive definite (smallest eigenvalue {eigenvalues.min():.6g} GPa)"
            )
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, index):
        """One-based Voigt lookup, ``C[1, 1]`` is C11."""
        i, j = index
        return self.matrix[i - 1, j - 1]

    def __mul__(self, scale):
        return StiffnessMatrix(float(scale) * self.matrix, self.frame, self.symmetry_class)

    __rmul__ = __mul__

    @property
    def tensor(self):
        return voigt_to_tensor(self.matrix)


@dataclass(frozen=True, eq=False)
class ComplianceMatrix:
    """6x6 Voigt compliance in 1/GPa.  Maps stress vectors to engineering strain vectors."""

    matrix: np.ndarray
    frame: str = "crystal"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_square6(self.matrix, "compliance matrix"))

    def __getitem__(self, index):
        i, j = index
        return self.matrix[i - 1, j - 1]


@dataclass(frozen=True, eq=False)
class DefectFrame:
    """Local defect axes expressed in crystal coordinates.

    ``z_axis`` is the C3 symmetry axis.  ``y_axis`` is derived as z cross x,
    so the triad is always right handed.  Use :meth:`from_axes` to build a
    frame from unnormalised lattice directions such as ``[1, 1, 1]``.
    """

    z_axis: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray = field(init=False)

    def __post_init__(self):
        z = np.asarray(self.z_axis, dtype=float)
        x = np.asarray(self.x_axis, dtype=float)
        if z.shape != (3,) or x.shape != (3,):
            raise ValidationError("frame axes must be 3-vectors")
        for name, v in (("z_axis", z), ("x_axis", x)):
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValidationError(f"{name} must be a unit vector")
        if abs(z @ x) > 1e-12:
            raise ValidationError("x_axis must be orthogonal to z_axis")
        object.__setattr__(self, "z_axis", z)
        object.__setattr__(self, "x_axis", x)
        object.__setattr__(self, "y_axis", np.cross(z, x))

    @classmethod
    def from_axes(cls, z, x):
        z = np.asarray(z, dtype=float)
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(z) == 0 or np.linalg.norm(x) == 0:
            raise ValidationError("frame axes must be nonzero")
        z = z / np.linalg.norm(z)
        x = x / np.linalg.norm(x)
        if abs(z @ x) > 1e-9:
            raise ValidationError(f"x axis {x.round(6).tolist()} is not orthogonal to z axis {z.round(6).tolist()}")
        x = x - (z @ x) * z
        return cls(z, x / np.linalg.norm(x))

    @classmethod
    def identity(cls):
        return cls(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))

    @property
    def rotation(self):
        """Rotation matrix taking crystal coordinates to defect coordinates (rows x, y, z)."""
        return np.vstack([self.x_axis, self.y_axis, self.z_axis])


def cubic_111_frames():
    """The six defect frames with z along [111] and x in a {110} mirror plane.

    Returned in the order x = [1,1,-2], [1,-2,1], [-2,1,1] and their negatives.
    Frames in the same C3 orbit (same sign) are physically equivalent; the
    two sign classes differ by a 180 degree turn about z, which is not a
    symmetry of the defect.
    """
    base = ([1, 1, -2], [1, -2, 1], [-2, 1, 1])
    xs = [np.array(x, dtype=float) for x in base] + [-np.array(x, dtype=float) for x in base]
    return [DefectFrame.from_axes([1, 1, 1], x) for x in xs]


def stiffness_cubic(c11, c12, c44):
    """Cubic stiffness matrix in the crystal frame.

    Raises
    ------
    ValidationError
        If any Born stability condition fails; the message names it.
    """
    violated = []
    if not c11 - c12 > 0:
        violated.append("C11 - C12 > 0")
    if not c11 + 2 * c12 > 0:
        violated.append("C11 + 2*C12 > 0")
    if not c44 > 0:
        violated.append("C44 > 0")
    if violated:
        raise ValidationError("cubic Born stability violated: " + ", ".join(violated))
    c = np.zeros((6, 6))
    c[:3, :3] = c12
    np.fill_diagonal(c[:3, :3], c11)
    c[3, 3] = c[4, 4] = c[5, 5] = c44
    return StiffnessMatrix(c, frame="crystal", symmetry_class="cubic")


def stiffness_hexagonal(c11, c12, c13, c33, c44):
    """Hexagonal stiffness matrix with the c-axis along z and C66 = (C11 - C12)/2."""
    violated = []
    if not c44 > 0:
        violated.append("C44 > 0")
    if not c11 > abs(c12):
        violated.append("C11 > |C12|")
    if not c33 * (c11 + c12) > 2 * c13**2:
        violated.append("C33*(C11 + C12) > 2*C13^2")
    if violated:
        raise ValidationError("hexagonal Born stability violated: " + ", ".join(violated))
    c = np.zeros((6, 6))
    c[:3, :3] = [[c11, c12, c13], [c12, c11, c13], [c13, c13, c33]]
    c[3, 3] = c[4, 4] = c44
    c[5, 5] = 0.5 * (c11 - c12)
    return StiffnessMatrix(c, frame="crystal", symmetry_class="hexagonal")


def voigt_to_tensor(c):
    """Unpack a 6x6 Voigt stiffness into the full 3x3x3x3 tensor."""
    c = np.asarray(c, dtype=float)
    t = np.empty((3, 3, 3, 3))
    for p, (i, j) in enumerate(VOIGT_PAIRS):
        for q, (k, l) in enumerate(VOIGT_PAIRS):
            t[i, j, k, l] = t[j, i, k, l] = t[i, j, l, k] = t[j, i, l, k] = c[p, q]
    return t


def tensor_to_voigt(t):
    t = np.asarray(t, dtype=float)
    return np.array([[t[i, j, k, l] for k, l in VOIGT_PAIRS] for i, j in VOIGT_PAIRS])


def _rotation_matrix(frame):
    if isinstance(frame, DefectFrame):
        return frame.rotation
    r = np.asarray(frame, dtype=float)
    if r.shape != (3, 3):
        raise ValidationError("rotation must be a 3x3 matrix")
    if not np.allclose(r @ r.T, np.eye(3), atol=1e-10) or np.linalg.det(r) < 0:
        raise ValidationError("rotation must be a proper orthonormal matrix")
    return r


def bond_matrix(rotation):
    """Bond matrix M with sigma' = M sigma for Voigt stress vectors.

    Stiffness transforms as C' = M C M^T.
    """
    r = _rotation_matrix(rotation)
    m = np.empty((6, 6))
    for p, (i, j) in enumerate(VOIGT_PAIRS):
        for q, (k, l) in enumerate(VOIGT_PAIRS):
            if k == l:
                m[p, q] = r[i, k] * r[j, k]
            else:
                m[p, q] = r[i, k] * r[j, l] + r[i, l] * r[j, k]
    return m


def _rotated_class(c):
    # a general rotation lowers cubic/hexagonal symmetry in the Voigt setting
    return "general" if c.symmetry_class != "hexagonal" else "hexagonal"


def rotate_stiffness(c, frame):
    """Transform a crystal-frame stiffness matrix into the defect frame.

    Parameters
    ----------
    c : StiffnessMatrix
    frame : DefectFrame or ndarray, shape (3, 3)
        Target axes.  A bare matrix must be a proper rotation whose rows are
        the new axes in old coordinates.

    Returns
    -------
    StiffnessMatrix
        Tagged ``frame="defect"``.
    """
    r = _rotation_matrix(frame)
    m = bond_matrix(r)
    rotated = m @ c.matrix @ m.T
    symmetry = c.symmetry_class
    if symmetry == "cubic" and not np.allclose(rotated, c.matrix, rtol=0, atol=1e-9 * np.abs(c.matrix).max()):
        symmetry = "trigonal" if np.allclose(np.abs(r[2]), 1 / np.sqrt(3), atol=1e-12) else "general"
    elif symmetry == "hexagonal" and not np.allclose(np.abs(r[2, 2]), 1.0, atol=1e-12):
        symmetry = "general"
    return StiffnessMatrix(rotated, frame="defect", symmetry_class=symmetry)


def rotate_stiffness_tensor(c, frame):
    """Reference rotation by explicit rank-4 sum C'_ijkl = R_ia R_jb R_kc R_ld C_abcd."""
    r = _rotation_matrix(frame)
    t = voigt_to_tensor(c.matrix)
    out = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    s = 0.0
                    for a in range(3):
                        for b in range(3):
                            for cc in range(3):
                                for d in range(3):
                                    s += r[i, a] * r[j, b] * r[k, cc] * r[l, d] * t[a, b, cc, d]
                    out[i, j, k, l] = s
    return StiffnessMatrix(tensor_to_voigt(out), frame="defect", symmetry_class=c.symmetry_class)


def compliance(c):
    """Invert a stiffness matrix; the frame tag is kept."""
    cond = np.linalg.cond(c.matrix)
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise NumericalError(f"stiffness matrix is ill conditioned (condition number {cond:.3g})")
    return ComplianceMatrix(np.linalg.inv(c.matrix), frame=c.frame)


def strain_from_stress(s, stress):
    """Strain produced by ``stress`` under compliance ``s`` (engineering shears halved on output)."""
    if s.frame != stress.frame:
        raise ContractError(f"compliance is in the {s.frame!r} frame but stress is in the {stress.frame!r} frame")
    return StrainTensor.from_voigt(s.matrix @ stress.voigt, frame=stress.frame)


def stress_from_strain(c, strain):
    if c.frame != strain.frame:
        raise ContractError(f"stiffness is in the {c.frame!r} frame but strain is in the {strain.frame!r} frame")
    return StressTensor.from_voigt(c.matrix @ strain.voigt, frame=strain.frame)
