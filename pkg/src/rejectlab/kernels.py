"""Backend selection for the SGD epoch kernels.

The compiled extension is used when it was built; otherwise the pure-Python
twin. Set ``REJECTLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from rejectlab import _kernels_py

if os.environ.get("REJECTLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from rejectlab import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

glvq_epoch = _impl.glvq_epoch
rslvq_epoch = _impl.rslvq_epoch


def compiled_available() -> bool:
    try:
        from rejectlab import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
