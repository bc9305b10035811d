"""Spin-1 algebra and the C3v spin-deformation Hamiltonian.

All Hamiltonians are H/h in MHz.  The basis order is fixed to
(|+1>, |0>, |-1>); the sign of the off-diagonal entries of Sy depends on it.

The deformation Hamiltonian is expanded over five operator channels::

    c_z   Sz^2
    c_d   Sy^2 - Sx^2
    c_xy  {Sx, Sy}
    c_xz  {Sx, Sz}
    c_yz  {Sy, Sz}

and is linear in six coupling constants (41, 43, 25, 26, 15, 16).  The same
form serves strain couplings (h, MHz/strain) and stress couplings (g, MHz/GPa).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elasticity import StrainTensor, StressTensor
from .exceptions import ContractError, ValidationError

__all__ = [
    "PARAMETERS",
    "CHANNELS",
    "ChannelCoefficients",
    "CouplingSet",
    "spin_matrices",
    "channel_operators",
    "zfs_hamiltonian",
    "decompose_zfs",
    "reassemble_zfs",
    "coupling_block",
    "strain_hamiltonian_coefficients",
    "build_hamiltonian",
    "transition_shifts",
]

PARAMETERS = ("41", "43", "25", "26", "15", "16")
CHANNELS = ("c_z", "c_d", "c_xy", "c_xz", "c_yz")
KINDS = ("strain", "stress")
UNITS = {"strain": "MHz/strain", "stress": "MHz/GPa"}
_PREFIX = {"strain": "h", "stress": "g"}


@lru_cache(maxsize=None)
def _spin_matrices():
    s = 1 / np.sqrt(2)
    sx = np.array([[0, s, 0], [s, 0, s], [0, s, 0]], dtype=complex)
    sy = np.array([[0, -1j * s, 0], [1j * s, 0, -1j * s], [0, 1j * s, 0]], dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    for m in (sx, sy, sz):
        m.setflags(write=False)
    return sx, sy, sz


def spin_matrices():
    """Return (Sx, Sy, Sz) for S=1 in the (|+1>, |0>, |-1>) basis.

    The arrays are read-only and shared between calls.
    """
    return _spin_matrices()


def _anticommutator(a, b):
    return a @ b + b @ a


@lru_cache(maxsize=None)
def _channel_operators():
    sx, sy, sz = spin_matrices()
    ops = (
        sz @ sz,
        sy @ sy - sx @ sx,
        _anticommutator(sx, sy),
        _anticommutator(sx, sz),
        _anticommutator(sy, sz),
    )
    for m in ops:
        m.setflags(write=False)
    return ops


def channel_operators():
    """The five channel operators in :data:`CHANNELS` order."""
    return _channel_operators()


@dataclass(frozen=True)
class ChannelCoefficients:
    """Amplitudes of the five operator channels, in MHz."""

    c_z: float = 0.0
    c_d: float = 0.0
    c_xy: float = 0.0
    c_xz: float = 0.0
    c_yz: float = 0.0

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (5,):
            raise ValidationError("channel coefficients need exactly five values")
        return cls(*(float(v) for v in values))

    def as_array(self):
        return np.array([self.c_z, self.c_d, self.c_xy, self.c_xz, self.c_yz])

    def as_dict(self):
        return dict(zip(CHANNELS, self.as_array().tolist()))

    def __add__(self, other):
        if not isinstance(other, ChannelCoefficients):
            return NotImplemented
        return ChannelCoefficients.from_array(self.as_array() + other.as_array())

    def __sub__(self, other):
        if not isinstance(other, ChannelCoefficients):
            return NotImplemented
        return ChannelCoefficients.from_array(self.as_array() - other.as_array())

    def __mul__(self, scale):
        return ChannelCoefficients.from_array(float(scale) * self.as_array())

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class CouplingSet:
    """Six symmetry-allowed coupling constants with standard errors.

    ``values`` and ``errors`` follow the :data:`PARAMETERS` order
    (41, 43, 25, 26, 15, 16).  ``kind`` is ``"strain"`` (h, MHz/strain) or
    ``"stress"`` (g, MHz/GPa).  Entries can be read by name: ``h["h43"]``,
    ``g["g43"]`` or simply ``h["43"]``.
    """

    values: np.ndarray
    errors: np.ndarray = None
    kind: str = "strain"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        values = np.array(self.values, dtype=float)
        errors = np.zeros(6) if self.errors is None else np.array(self.errors, dtype=float)
        if values.shape != (6,) or errors.shape != (6,):
            raise ValidationError("a coupling set needs six values and six errors")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(errors)):
            raise ValidationError("coupling values and errors must be finite")
        if np.any(errors < 0):
            raise ValidationError("standard errors must be non-negative")
        values.setflags(write=False)
        errors.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "errors", errors)

    @classmethod
    def from_mapping(cls, values, errors=None, kind="strain"):
        """Build from ``{"h41": ..., "h43": ...}`` style mappings (prefix optional)."""

        def pick(mapping, key):
            for candidate in (key, "h" + key, "g" + key):
                if candidate in mapping:
                    return mapping[candidate]
            raise ValidationError(f"missing coupling parameter {key}")

        vals = [pick(values, p) for p in PARAMETERS]
        errs = None if errors is None else [pick(errors, p) for p in PARAMETERS]
        return cls(vals, errs, kind)

    @property
    def prefix(self):
        return _PREFIX[self.kind]

    @property
    def unit(self):
        return UNITS[self.kind]

    @property
    def names(self):
        return tuple(self.prefix + p for p in PARAMETERS)

    def _index(self, name):
        key = name[1:] if name[:1] in ("h", "g") else name
        try:
            return PARAMETERS.index(key)
        except ValueError:
            raise KeyError(name) from None

    def __getitem__(self, name):
        return float(self.values[self._index(name)])

    def error(self, name):
        return float(self.errors[self._index(name)])

    def as_dict(self):
        return {
            n: {"value": float(v), "error": float(e)} for n, v, e in zip(self.names, self.values, self.errors)
        }

    def __repr__(self):
        body = ", ".join(f"{n}={v:.6g}±{e:.2g}" for n, v, e in zip(self.names, self.values, self.errors))
        return f"CouplingSet({self.kind}: {body})"


def zfs_hamiltonian(d):
    """Direct contraction S^T D S for a 3x3 zero-field-splitting matrix."""
    d = np.asarray(d, dtype=float)
    spins = spin_matrices()
    return sum(d[i, j] * spins[i] @ spins[j] for i in range(3) for j in range(3))


def _check_zfs(d):
    d = np.asarray(d, dtype=float)
    if d.shape != (3, 3):
        raise ValidationError(f"zero-field splitting matrix must be 3x3, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValidationError("zero-field splitting matrix entries must be finite")
    scale = max(np.abs(d).max(), 1e-300)
    if np.abs(d - d.T).max() > 1e-12 * scale:
        raise ValidationError("zero-field splitting matrix must be symmetric")
    return d


def decompose_zfs(d):
    """Split a zero-field-splitting matrix into identity part and channels.

    Parameters
    ----------
    d : array_like, shape (3, 3)
        Symmetric D matrix in MHz.

    Returns
    -------
    trace_part : float
        Coefficient of the identity in S^T D S, equal to D_xx + D_yy.
    coefficients : ChannelCoefficients
    """
    d = _check_zfs(d)
    trace_part = d[0, 0] + d[1, 1]
    coefficients = ChannelCoefficients(
        c_z=d[2, 2] - 0.5 * (d[0, 0] + d[1, 1]),
        c_d=0.5 * (d[1, 1] - d[0, 0]),
        c_xy=0.5 * (d[0, 1] + d[1, 0]),
        c_xz=0.5 * (d[0, 2] + d[2, 0]),
        c_yz=0.5 * (d[1, 2] + d[2, 1]),
    )
    return float(trace_part), coefficients


def reassemble_zfs(coefficients, trace_part=None):
    """Inverse of :func:`decompose_zfs`.

    Without ``trace_part`` the traceless D matrix is returned.  Otherwise the
    isotropic part is chosen so that D_xx + D_yy equals ``trace_part``.
    """
    c = coefficients
    d = np.array(
        [
            [-c.c_z / 3 - c.c_d, c.c_xy, c.c_xz],
            [c.c_xy, -c.c_z / 3 + c.c_d, c.c_yz],
            [c.c_xz, c.c_yz, 2 * c.c_z / 3],
        ]
    )
    if trace_part is not None:
        d += np.eye(3) * 0.5 * (trace_part + 2 * c.c_z / 3)
    return d


def coupling_block(tensor):
    """5x6 linear map from couplings to channels for one deformation.

    ``tensor`` is either a :class:`StrainTensor` (tensor shears) or a
    :class:`StressTensor`; the arithmetic is identical.
    """
    m = np.asarray(getattr(tensor, "matrix", tensor), dtype=float)
    xx, yy, zz = m[0, 0], m[1, 1], m[2, 2]
    yz, zx, xy = m[1, 2], m[0, 2], m[0, 1]
    b = np.zeros((5, 6))
    # columns: 41, 43, 25, 26, 15, 16
    b[0, 0] = xx + yy
    b[0, 1] = zz
    b[1, 4] = -0.25 * (xx - yy)
    b[1, 5] = 0.5 * zx
    b[2, 4] = 0.5 * xy
    b[2, 5] = 0.5 * yz
    b[3, 2] = -0.25 * (xx - yy)
    b[3, 3] = 0.5 * zx
    b[4, 2] = 0.5 * xy
    b[4, 3] = 0.5 * yz
    return b


def _check_pairing(couplings, tensor):
    if couplings.kind == "strain" and not isinstance(tensor, StrainTensor):
        raise ContractError("strain couplings (h) must be paired with a StrainTensor")
    if couplings.kind == "stress" and not isinstance(tensor, StressTensor):
        raise ContractError("stress couplings (g) must be paired with a StressTensor")


def strain_hamiltonian_coefficients(couplings, tensor):
    """Channel amplitudes of the deformation Hamiltonian.

    Works for both coupling kinds: h with a strain tensor, g with a stress
    tensor.  Any other pairing raises :class:`ContractError`.
    """
    _check_pairing(couplings, tensor)
    return ChannelCoefficients.from_array(coupling_block(tensor) @ couplings.values)


def build_hamiltonian(coefficients):
    """Assemble the 3x3 Hermitian Hamiltonian (MHz) from channel amplitudes."""
    ops = channel_operators()
    h = np.zeros((3, 3), dtype=complex)
    for amplitude, op in zip(coefficients.as_array(), ops):
        h += amplitude * op
    return h


def transition_shifts(base_splitting, coefficients):
    """Exact |0> -> |+-> transition frequencies of D0 Sz^2 plus a perturbation.

    Parameters
    ----------
    base_splitting : float
        Unperturbed zero-field splitting D0 in MHz, must be positive.
    coefficients : ChannelCoefficients
        Perturbation channels.

    Returns
    -------
    (f_plus, f_minus) : tuple of float
        Upper and lower transition frequency relative to the level that
        is mostly |m=0>.
    """
    if not base_splitting > 0:
        raise ValidationError("base splitting must be positive")
    _, _, sz = spin_matrices()
    h = base_splitting * (sz @ sz) + build_hamiltonian(coefficients)
    energies, vectors = np.linalg.eigh(h)
    zero = int(np.argmax(np.abs(vectors[1, :]) ** 2))
    others = sorted((energies[k] - energies[zero] for k in range(3) if k != zero), reverse=True)
    return float(others[0]), float(others[1])
