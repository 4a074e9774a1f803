"""Backend selection for the pairwise kernel operations.

Prefers the compiled Cython extension; falls back to the numpy
implementation when the extension is missing or when the environment
variable ``MORPHOFLOW_FORCE_FALLBACK`` is set (useful for benchmarking and
for testing backend parity).
"""

import os

from . import numpy_backend

if os.environ.get("MORPHOFLOW_FORCE_FALLBACK"):
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _ext as _impl

        BACKEND = "ext"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

gram = _impl.gram
eval_field = _impl.eval_field
grad_tensor = _impl.grad_tensor

__all__ = ["BACKEND", "gram", "eval_field", "grad_tensor", "numpy_backend"]
