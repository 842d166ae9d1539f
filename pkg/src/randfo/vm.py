"""Evaluator backend selection.

The compiled extension is used when importable; setting the environment
variable ``RANDFO_BACKEND=python`` forces the pure-Python interpreter.
"""

from __future__ import annotations

import os

from . import _vm_py

_FORCE = os.environ.get("RANDFO_BACKEND", "").strip().lower()

if _FORCE == "python":
    _impl = _vm_py
else:
    try:
        from . import _vm_c as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        if _FORCE == "cython":
            raise
        _impl = _vm_py

Machine = _impl.Machine
BACKEND: str = _impl.BACKEND
PyMachine = _vm_py.Machine


def compiled_machine():
    """The compiled Machine class, or None when the extension is missing."""
    try:
        from . import _vm_c
    except ImportError:
        return None
    return _vm_c.Machine
