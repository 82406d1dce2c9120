"""Backend selection for the sequential kernels.

The compiled extension is used when it imports; set ``CBWCS_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("CBWCS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

esn_teacher_states = _impl.esn_teacher_states
esn_predict = _impl.esn_predict
feedback_decode = _impl.feedback_decode
method1_decode = _impl.method1_decode

__all__ = ["BACKEND", "esn_teacher_states", "esn_predict", "feedback_decode", "method1_decode"]
