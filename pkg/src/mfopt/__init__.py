"""mfopt: model-free optimization toolkit and benchmark harness."""

__version__ = "0.1.0"

from .core import (ParamVector, QuantizationSpec, RngStream, RunRecord,
                   argbest, quantize, quantize_array)
from .objectives import (Objective, RastriginObjective, RastriginSpec,
                         SphereObjective, rastrigin, wrap)

__all__ = [
    "__version__",
    "ParamVector", "QuantizationSpec", "RngStream", "RunRecord",
    "argbest", "quantize", "quantize_array",
    "Objective", "RastriginObjective", "RastriginSpec", "SphereObjective",
    "rastrigin", "wrap",
]
