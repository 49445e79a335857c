"""Export report emitted alongside every conversion."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class ExportReport:
    """What got exported and whether downstream quantization will bite.

    ``max_abs_weight`` and ``weights_outside_clamp`` make the impact of the
    compiler's [-2.0, 2.0) weight clamp visible before any circuit is built;
    both are zero for forests, which carry no float weights.
    """

    framework: str
    framework_version: str
    shape: str
    max_abs_weight: float = 0.0
    weights_outside_clamp: int = 0

    def to_json(self) -> dict:
        return {
            "framework": self.framework,
            "framework_version": self.framework_version,
            "shape": self.shape,
            "max_abs_weight": self.max_abs_weight,
            "weights_outside_clamp": self.weights_outside_clamp,
        }
