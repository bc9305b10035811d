"""Shot-noise-limited stress sensitivity of a Hahn-echo ODMR measurement.

    eta = 1 / (4 |g| C sqrt(beta T2))

with g in Hz/GPa, C the readout contrast, T2 in seconds and beta the
photon yield.  How beta is obtained from a count rate is a convention;
every result records which one was used.

``per-readout`` (default)
    beta = count_rate * readout_duration, photons detected per readout.
    beta is dimensionless, so eta comes out in GPa/sqrt(Hz).
``per-shot``
    beta = count_rate * readout_duration / t2, photons per second averaged
    over one T2-long sequence.  beta*T2 no longer depends on T2.
``raw-rate``
    beta = count_rate.
``fixed``
    beta taken verbatim from ``ReadoutScenario.beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .exceptions import ValidationError

__all__ = [
    "BETA_CONVENTIONS",
    "DEFAULT_BETA_CONVENTION",
    "ReadoutScenario",
    "SensitivityResult",
    "contrast",
    "photon_yield",
    "eta",
    "scenario_table",
]

BETA_CONVENTIONS = ("per-readout", "per-shot", "raw-rate", "fixed")
DEFAULT_BETA_CONVENTION = "per-readout"

_BETA_NOTES = {
    "per-readout": "beta = count_rate * readout_duration (photons per readout)",
    "per-shot": "beta = count_rate * readout_duration / T2 (photons/s over one T2-long shot)",
    "raw-rate": "beta = count_rate (counts/s)",
    "fixed": "beta supplied explicitly",
}


def contrast(p0, p1):
    """Readout contrast (p0 - p1) / (p0 + p1) from bright and dark counts."""
    if p0 < 0 or p1 < 0:
        raise ValidationError("photon counts must be non-negative")
    if p0 + p1 <= 0:
        raise ValidationError("bright and dark counts are both zero")
    if p0 < p1:
        raise ValidationError("dark-state counts exceed bright-state counts (p0 and p1 swapped?)")
    return (p0 - p1) / (p0 + p1)


@dataclass(frozen=True)
class ReadoutScenario:
    """Inputs of the sensitivity formula.

    ``coupling`` is in MHz/GPa and only its magnitude matters.  ``t2`` and
    ``readout_duration`` are in seconds, ``count_rate`` in counts/s.
    Setting ``beta`` overrides the count-rate conventions.
    """

    contrast: float
    count_rate: float
    readout_duration: float
    t2: float
    coupling: float
    label: str = ""
    beta: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.contrast <= 1.0:
            raise ValidationError(f"contrast must lie in [0, 1], got {self.contrast}")
        for name in ("count_rate", "readout_duration", "t2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive, got {value}")
        if not math.isfinite(self.coupling):
            raise ValidationError("coupling must be finite")
        if self.beta is not None and not self.beta > 0:
            raise ValidationError("beta must be positive")

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class SensitivityResult:
    """``eta`` in GPa/sqrt(Hz) and ``inverse_eta`` in sqrt(Hz)/GPa.

    When contrast or coupling vanish, ``insensitive`` is set, ``eta`` is
    None and ``inverse_eta`` is 0.
    """

    label: str
    eta: float | None
    inverse_eta: float
    beta_used: float
    beta_convention: str
    assumptions: str
    insensitive: bool = False


def photon_yield(scenario, convention=DEFAULT_BETA_CONVENTION):
    """beta for ``scenario`` under ``convention``.  An explicit ``scenario.beta`` wins."""
    if scenario.beta is not None:
        return scenario.beta, "fixed"
    if convention == "per-readout":
        return scenario.count_rate * scenario.readout_duration, convention
    if convention == "per-shot":
        return scenario.count_rate * scenario.readout_duration / scenario.t2, convention
    if convention == "raw-rate":
        return scenario.count_rate, convention
    if convention == "fixed":
        raise ValidationError("the fixed beta convention needs scenario.beta")
    raise ValidationError(f"unknown beta convention {convention!r}; expected one of {BETA_CONVENTIONS}")


def eta(scenario, convention=DEFAULT_BETA_CONVENTION):
    """Stress sensitivity of one scenario; see the module docstring for units."""
    beta, used = photon_yield(scenario, convention)
    assumptions = _BETA_NOTES[used] + "; measurement and free precession time approximated by T2"
    g_hz = abs(scenario.coupling) * 1e6
    if g_hz == 0 or scenario.contrast == 0:
        return SensitivityResult(scenario.label, None, 0.0, beta, used, assumptions, insensitive=True)
    inverse = 4.0 * g_hz * scenario.contrast * math.sqrt(beta * scenario.t2)
    return SensitivityResult(scenario.label, 1.0 / inverse, inverse, beta, used, assumptions)


def scenario_table(scenarios, convention=DEFAULT_BETA_CONVENTION):
    """Evaluate scenarios in the given order.

    Returns
    -------
    list of (label, eta, inverse_eta)
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValidationError("at least one scenario is required")
    rows = []
    for s in scenarios:
        r = eta(s, convention)
        rows.append((s.label, r.eta, r.inverse_eta))
    return rows
