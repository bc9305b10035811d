"""Extraction of spin-strain couplings from (strain, D matrix) datasets.

:class:`ZfsCouplingRegressor` is a scikit-learn regressor: ``X`` holds the
six strain tensor components per sample (xx, yy, zz, yz, zx, xy), ``y`` the
five baseline-subtracted channel amplitudes in MHz.  :func:`fit` wraps it for
lists of :class:`ZfsSample`.  :func:`generate_synthetic` produces datasets
with a known answer, and :func:`load_dataset` / :func:`dump_dataset` handle
the JSON exchange format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .elasticity import COMPONENT_NAMES, StrainTensor
from .exceptions import IdentifiabilityError, ValidationError
from .spin import PARAMETERS, ChannelCoefficients, CouplingSet, coupling_block, decompose_zfs, reassemble_zfs

__all__ = [
    "MAX_STRAIN",
    "ZfsSample",
    "FitResult",
    "ZfsCouplingRegressor",
    "design_row",
    "design_matrix",
    "default_strain_battery",
    "fit",
    "generate_synthetic",
    "samples_to_arrays",
    "load_dataset",
    "dump_dataset",
]

MAX_STRAIN = 0.1
_STRAIN_KEYS = tuple("e" + c for c in COMPONENT_NAMES)


@dataclass(frozen=True, eq=False)
class ZfsSample:
    """One deformation and the zero-field-splitting matrix computed for it (MHz)."""

    strain: StrainTensor
    d_matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        d = np.array(self.d_matrix, dtype=float)
        if d.shape == (9,):
            d = d.reshape(3, 3)
        decompose_zfs(d)  # shape and symmetry validation
        if np.abs(self.strain.matrix).max() >= MAX_STRAIN:
            raise ValidationError(f"strain entries must stay below {MAX_STRAIN} in magnitude ({self.label or 'sample'})")
        d.setflags(write=False)
        object.__setattr__(self, "d_matrix", d)


@dataclass(frozen=True, eq=False)
class FitResult:
    h: CouplingSet
    residual_rms: np.ndarray
    condition_number: float
    sample_count: int

    def as_dict(self):
        return {
            "h": self.h.as_dict(),
            "unit": self.h.unit,
            "residual_rms_MHz": dict(zip(("c_z", "c_d", "c_xy", "c_xz", "c_yz"), self.residual_rms.tolist())),
            "condition_number": self.condition_number,
            "sample_count": self.sample_count,
        }


def design_row(strain):
    """5x6 design block B such that channels = B @ h for this strain."""
    return coupling_block(strain)


def _block_from_components(components):
    xx, yy, zz, yz, zx, xy = components
    return coupling_block(np.array([[xx, xy, zx], [xy, yy, yz], [zx, yz, zz]]))


def design_matrix(X):
    """Stack the design blocks of an (n, 6) array of strain components."""
    return np.vstack([_block_from_components(row) for row in np.asarray(X, dtype=float)])


def _unresolved(a, rank_tol):
    _, s, vt = np.linalg.svd(a)
    s_full = np.zeros(6)
    s_full[: len(s)] = s
    null = vt[s_full <= rank_tol * max(s_full.max(), 1e-300)]
    if null.size == 0:
        return []
    weight = np.sqrt((null**2).sum(axis=0))
    return [PARAMETERS[k] for k in range(6) if weight[k] > 1e-8]


class ZfsCouplingRegressor(RegressorMixin, BaseEstimator):
    """Joint least-squares fit of the six strain couplings.

    Parameters
    ----------
    rank_tol : float, default=1e-10
        Singular values of the design matrix below ``rank_tol`` times the
        largest one count as zero.

    Attributes
    ----------
    coef_ : ndarray, shape (6,)
        Couplings (41, 43, 25, 26, 15, 16) in MHz/strain.
    stderr_ : ndarray, shape (6,)
        Standard errors from residual variance and (A^T A)^-1.
    residual_rms_ : ndarray, shape (5,)
        RMS residual per channel, MHz.
    condition_number_ : float
        Condition number of the normal matrix A^T A.
    n_samples_ : int
    """

    def __init__(self, rank_tol=1e-10):
        self.rank_tol = rank_tol

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        if X.shape[1] != 6:
            raise ValidationError(f"X must have 6 strain components per sample, got {X.shape[1]}")
        if y.ndim != 2 or y.shape[1] != 5:
            raise ValidationError("y must have 5 channel amplitudes per sample")
        if X.shape[0] < 2:
            raise ValidationError(f"at least 2 samples are needed, got {X.shape[0]}")
        a = design_matrix(X)
        b = y.reshape(-1)
        unresolved = _unresolved(a, self.rank_tol)
        if unresolved:
            names = ", ".join("h" + p for p in unresolved)
            raise IdentifiabilityError(f"strain battery does not determine {names}", unresolved=["h" + p for p in unresolved])
        coef, *_ = np.linalg.lstsq(a, b, rcond=None)
        residuals = b - a @ coef
        dof = a.shape[0] - 6
        normal = a.T @ a
        sigma2 = residuals @ residuals / dof if dof > 0 else 0.0
        self.coef_ = coef
        self.stderr_ = np.sqrt(np.clip(sigma2 * np.diag(np.linalg.inv(normal)), 0.0, None))
        self.residual_rms_ = np.sqrt((residuals.reshape(-1, 5) ** 2).mean(axis=0))
        self.condition_number_ = float(np.linalg.cond(normal))
        self.n_samples_ = X.shape[0]
        self.n_features_in_ = 6
        return self

    def predict(self, X):
        """Channel amplitudes (n, 5) in MHz predicted for strain components X."""
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != 6:
            raise ValidationError(f"X must have 6 strain components per sample, got {X.shape[1]}")
        return (design_matrix(X) @ self.coef_).reshape(-1, 5)

    @property
    def couplings_(self):
        check_is_fitted(self, "coef_")
        return CouplingSet(self.coef_, self.stderr_, "strain")


def samples_to_arrays(samples, baseline):
    """Strain components (n, 6) and baseline-subtracted channels (n, 5)."""
    _, base = decompose_zfs(baseline)
    X = np.array([s.strain.components for s in samples])
    y = np.array([(decompose_zfs(s.d_matrix)[1] - base).as_array() for s in samples])
    return X.reshape(-1, 6), y.reshape(-1, 5)


def fit(samples, baseline):
    """Fit strain couplings to a dataset.

    Parameters
    ----------
    samples : list of ZfsSample
        Strained configurations.
    baseline : array_like, shape (3, 3)
        D matrix of the unstrained defect, MHz.  Subtracted channel by
        channel; it need not be axial.

    Returns
    -------
    FitResult
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValidationError(f"at least 2 samples are needed, got {len(samples)}")
    X, y = samples_to_arrays(samples, baseline)
    est = ZfsCouplingRegressor().fit(X, y)
    return FitResult(est.couplings_, est.residual_rms_, est.condition_number_, est.n_samples_)


def default_strain_battery(magnitudes=(0.001, 0.002), directions=COMPONENT_NAMES):
    """Single-component strains along each direction with magnitudes +-m.

    The magnitude is the tensor component (eps_yz, not 2*eps_yz), so the
    defaults give 6 directions x 4 values = 24 configurations.
    """
    battery = []
    for name in directions:
        if name not in COMPONENT_NAMES:
            raise ValidationError(f"unknown strain direction {name!r}; expected one of {COMPONENT_NAMES}")
        for m in magnitudes:
            for sign in (1.0, -1.0):
                battery.append(StrainTensor.from_components(**{name: sign * m}))
    return battery


def generate_synthetic(h, strain_battery, noise_rms=0.0, seed=0, baseline=None):
    """Synthetic dataset from known couplings.

    Each channel gets i.i.d. Gaussian noise of RMS ``noise_rms`` (MHz)
    before the D matrix is reassembled on top of ``baseline`` (zero by
    default).  The output is fully determined by ``seed``.
    """
    if h.kind != "strain":
        raise ValidationError("synthetic datasets are generated from strain couplings")
    if not noise_rms >= 0:
        raise ValidationError("noise_rms must be non-negative")
    base = np.zeros((3, 3)) if baseline is None else np.asarray(baseline, dtype=float)
    decompose_zfs(base)  # shape and symmetry validation
    rng = np.random.default_rng(seed)
    samples = []
    for k, strain in enumerate(strain_battery):
        channels = design_row(strain) @ h.values + rng.normal(0.0, noise_rms, size=5)
        d = base + reassemble_zfs(ChannelCoefficients.from_array(channels))
        samples.append(ZfsSample(strain, d, label=f"sample-{k:03d}"))
    return samples


def _strain_record(strain):
    return dict(zip(_STRAIN_KEYS, strain.components.tolist()))


def dump_dataset(samples, baseline):
    """JSON-ready list of records, baseline first."""
    records = [
        {
            "label": "baseline",
            "strain": dict.fromkeys(_STRAIN_KEYS, 0.0),
            "d_matrix": np.asarray(baseline, dtype=float).reshape(-1).tolist(),
        }
    ]
    for s in samples:
        record = {"strain": _strain_record(s.strain), "d_matrix": s.d_matrix.reshape(-1).tolist()}
        if s.label:
            record["label"] = s.label
        records.append(record)
    return records


def _parse_record(record, index):
    if not isinstance(record, dict):
        raise ValidationError(f"record {index} is not an object")
    try:
        strain = record["strain"]
        d = record["d_matrix"]
    except KeyError as exc:
        raise ValidationError(f"record {index} lacks {exc.args[0]!r}") from None
    unknown = set(strain) - set(_STRAIN_KEYS)
    if unknown:
        raise ValidationError(f"record {index} has unknown strain keys {sorted(unknown)}")
    comps = {k[1:]: float(strain.get(k, 0.0)) for k in _STRAIN_KEYS}
    d = np.asarray(d, dtype=float)
    if d.size != 9:
        raise ValidationError(f"record {index}: d_matrix must hold 9 numbers")
    return StrainTensor.from_components(**comps), d.reshape(3, 3), str(record.get("label", ""))


def load_dataset(source):
    """Read a dataset from a path, file object or already-parsed list.

    Returns
    -------
    samples : list of ZfsSample
    baseline : ndarray, shape (3, 3)
        From the record labelled ``"baseline"``, else the first record with
        zero strain.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            records = json.load(fh)
    elif hasattr(source, "read"):
        records = json.load(source)
    else:
        records = source
    if not isinstance(records, list):
        raise ValidationError("dataset must be a JSON array of records")
    parsed = [_parse_record(r, i) for i, r in enumerate(records)]
    base_index = next((i for i, (_, _, label) in enumerate(parsed) if label == "baseline"), None)
    if base_index is None:
        base_index = next((i for i, (eps, _, _) in enumerate(parsed) if not np.any(eps.matrix)), None)
    if base_index is None:
        raise ValidationError("dataset has no baseline record (zero strain)")
    base_strain, baseline, _ = parsed[base_index]
    if np.any(base_strain.matrix):
        raise ValidationError("baseline record must have zero strain")
    decompose_zfs(baseline)
    samples = [ZfsSample(eps, d, label) for i, (eps, d, label) in enumerate(parsed) if i != base_index]
    return samples, baseline
