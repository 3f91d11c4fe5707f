"""Sample-size policies: the proven constants, or a calibrated rescaling of them.

The bounds in :mod:`flolearn.shadows` carry large, deliberately loose
constants (the active learner's stage-1 constant is 2.2e8). A
:class:`Calibration` multiplies each named bound by its own factor so
that desk-scale runs finish in seconds. ``CALIBRATED`` holds the factors
found by the pilot sweep in ``demos/calibrate_constants.py`` with a margin
of 1.4x to 4x, rounded up to one significant figure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from ..shadows import sample_size


@dataclass(frozen=True)
class Calibration:
    scales: Mapping[str, float] = field(default_factory=dict)
    multiplier: float = 1.0
    name: str = "custom"

    def size(self, kind: str, **params) -> int:
        return sample_size(kind, self.multiplier * self.scales.get(kind, 1.0), **params)

    def scaled(self, multiplier: float) -> "Calibration":
        """Same per-bound factors with an extra global multiplier."""
        return replace(self, multiplier=self.multiplier * multiplier)

    def to_json(self) -> dict:
        return {"name": self.name, "scales": dict(self.scales), "multiplier": self.multiplier}


PAPER = Calibration(name="paper")

CALIBRATED = Calibration(
    name="calibrated",
    scales={
        "single_particle": 7e-12,
        "phase_alg5": 0.01,
        "active_act": 6e-9,
        "active_pas": 5e-9,
        "active_ph": 0.02,
        "choi": 0.04,
    },
)
