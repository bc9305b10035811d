"""Material and readout-scenario presets stored as TOML files.

Shipped presets live next to this module.  Setting ``SPINSTRESS_PRESET_DIR``
adds a directory that is searched first, so a user file with the same name
shadows the shipped one.  A preset can also be loaded from an explicit path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .conversion import strain_to_stress_couplings, stress_to_strain_couplings
from .elasticity import DefectFrame, rotate_stiffness, stiffness_cubic, stiffness_hexagonal
from .exceptions import ValidationError
from .sensitivity import ReadoutScenario
from .spin import PARAMETERS, CouplingSet

__all__ = [
    "PRESET_DIR_ENV",
    "MaterialPreset",
    "preset_dirs",
    "list_presets",
    "find_preset",
    "load_material",
    "load_scenarios",
]

PRESET_DIR_ENV = "SPINSTRESS_PRESET_DIR"
_SHIPPED = Path(__file__).with_name("presets")
_CUBIC_KEYS = ("C11", "C12", "C44")
_HEXAGONAL_KEYS = ("C11", "C12", "C13", "C33", "C44")


def preset_dirs():
    dirs = []
    extra = os.environ.get(PRESET_DIR_ENV)
    if extra:
        dirs.append(Path(extra))
    dirs.append(_SHIPPED)
    return dirs


def _read(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def list_presets():
    """Mapping name -> (kind, description, path); user directory entries win."""
    found = {}
    for directory in reversed(preset_dirs()):
        if not directory.is_dir():
            continue
        for path in sorted(directory.glob("*.toml")):
            data = _read(path)
            name = data.get("name", path.stem)
            found[name] = (data.get("kind", "material"), data.get("description", ""), path)
    return dict(sorted(found.items()))


def find_preset(name_or_path):
    path = Path(name_or_path)
    if path.suffix == ".toml" and path.is_file():
        return path
    for directory in preset_dirs():
        candidate = directory / f"{name_or_path}.toml"
        if candidate.is_file():
            return candidate
    presets = list_presets()
    if name_or_path in presets:
        return presets[name_or_path][2]
    raise ValidationError(f"unknown preset {name_or_path!r}; available: {', '.join(presets)}")


def _coupling_table(table, kind):
    if table is None:
        return None
    prefix = "h" if kind == "strain" else "g"
    values, errors = [], []
    for p in PARAMETERS:
        key = prefix + p
        if key not in table:
            raise ValidationError(f"coupling table is missing {key}")
        entry = table[key]
        if isinstance(entry, (int, float)):
            values.append(float(entry))
            errors.append(0.0)
        else:
            value, error = entry
            values.append(float(value))
            errors.append(float(error))
    return CouplingSet(values, errors, kind)


@dataclass(frozen=True, eq=False)
class MaterialPreset:
    name: str
    symmetry_class: str
    elastic_constants: dict
    frame: DefectFrame
    strain_couplings: CouplingSet | None = None
    stress_couplings: CouplingSet | None = None
    description: str = ""

    @classmethod
    def from_dict(cls, data):
        symmetry = data.get("symmetry_class")
        constants = {k: float(v) for k, v in data.get("elastic", {}).items()}
        keys = {"cubic": _CUBIC_KEYS, "hexagonal": _HEXAGONAL_KEYS}.get(symmetry)
        if keys is None:
            raise ValidationError(f"symmetry_class must be 'cubic' or 'hexagonal', got {symmetry!r}")
        missing = [k for k in keys if k not in constants]
        if missing:
            raise ValidationError(f"elastic constants missing: {', '.join(missing)}")
        frame_data = data.get("frame", {})
        frame = DefectFrame.from_axes(frame_data.get("z", [0, 0, 1]), frame_data.get("x", [1, 0, 0]))
        return cls(
            name=data.get("name", "custom"),
            symmetry_class=symmetry,
            elastic_constants={k: constants[k] for k in keys},
            frame=frame,
            strain_couplings=_coupling_table(data.get("strain_couplings"), "strain"),
            stress_couplings=_coupling_table(data.get("stress_couplings"), "stress"),
            description=data.get("description", ""),
        )

    def stiffness(self):
        """Crystal-frame stiffness matrix."""
        c = self.elastic_constants
        if self.symmetry_class == "cubic":
            return stiffness_cubic(c["C11"], c["C12"], c["C44"])
        return stiffness_hexagonal(c["C11"], c["C12"], c["C13"], c["C33"], c["C44"])

    def defect_stiffness(self, frame=None):
        return rotate_stiffness(self.stiffness(), self.frame if frame is None else frame)

    def convert(self, frame=None, check=True):
        """h -> g for the shipped strain couplings."""
        if self.strain_couplings is None:
            raise ValidationError(f"preset {self.name!r} has no strain couplings")
        return strain_to_stress_couplings(self.strain_couplings, self.defect_stiffness(frame), check=check)

    def convert_back(self, frame=None, check=True):
        """g -> h for the shipped stress couplings."""
        if self.stress_couplings is None:
            raise ValidationError(f"preset {self.name!r} has no stress couplings")
        return stress_to_strain_couplings(self.stress_couplings, self.defect_stiffness(frame), check=check)

    def self_check(self, slack=0.005):
        """Compare converted g with the shipped g.

        Returns a list of (name, computed, reference, tolerance, ok) with
        tolerance = quoted error + ``slack``.
        """
        if self.strain_couplings is None or self.stress_couplings is None:
            return []
        g = self.convert().target
        ref = self.stress_couplings
        rows = []
        for name, value, expected, err in zip(ref.names, g.values, ref.values, ref.errors):
            tol = err + slack
            rows.append((name, float(value), float(expected), float(tol), bool(abs(value - expected) <= tol)))
        return rows


def load_material(name_or_path):
    path = find_preset(name_or_path)
    data = _read(path)
    if data.get("kind", "material") != "material":
        raise ValidationError(f"{path} is not a material preset")
    return MaterialPreset.from_dict(data)


def load_scenarios(name_or_path="nv-vs-divacancy"):
    """List of :class:`ReadoutScenario` from a scenario preset or file."""
    path = find_preset(name_or_path)
    data = _read(path)
    entries = data.get("scenario")
    if data.get("kind") != "scenarios" or not entries:
        raise ValidationError(f"{path} holds no [[scenario]] entries")
    scenarios = []
    for i, entry in enumerate(entries):
        try:
            scenarios.append(
                ReadoutScenario(
                    contrast=float(entry["contrast"]),
                    count_rate=float(entry["count_rate"]),
                    readout_duration=float(entry["readout_duration"]),
                    t2=float(entry["t2"]),
                    coupling=float(entry["coupling"]),
                    label=str(entry.get("label", f"scenario-{i}")),
                    beta=None if "beta" not in entry else float(entry["beta"]),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"{path}: scenario {i} lacks {exc.args[0]!r}") from None
    return scenarios

