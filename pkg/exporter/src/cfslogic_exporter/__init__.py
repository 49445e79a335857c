"""Export externally trained models to the cfslogic model JSON schema.

The exporter never quantizes: weights and biases are serialized at full
float precision and the circuit compiler owns the one normative quantizer.
"""

from .forest import export_forest
from .mlp import export_mlp
from .report import ExportReport

__all__ = ["ExportReport", "export_forest", "export_mlp"]
