"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback is loaded. Set ``NESTCHAN_PURE_PYTHON=1`` to force the
fallback; the benchmark and the equivalence tests import both modules
directly.
"""

import os

from . import _kernels_py

_FORCE_PY = os.environ.get("NESTCHAN_PURE_PYTHON", "") not in ("", "0")

compiled = None
if not _FORCE_PY:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

impl = compiled if compiled is not None else _kernels_py
BACKEND = "cython" if compiled is not None else "numpy"

materialize = impl.materialize
class_sum = impl.class_sum
selected_materialize = impl.selected_materialize
selected_class_sum = impl.selected_class_sum

# index maps are only needed by numpy code paths (schur assembly etc.)
class_index = _kernels_py.class_index
selected_class_index = _kernels_py.selected_class_index
