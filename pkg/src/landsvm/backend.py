"""Select the solver core at import time.

The compiled extension (landsvm._smo) is preferred; the pure-Python
mirror is used when it is absent. Set LANDSVM_BACKEND=python or
LANDSVM_BACKEND=cython to force a choice; forcing cython on an install
without the extension raises immediately rather than degrading silently.
"""

import os

_forced = os.environ.get("LANDSVM_BACKEND", "").strip().lower()
if _forced not in ("", "python", "cython"):
    raise ImportError(
        f"LANDSVM_BACKEND must be 'python' or 'cython', got {_forced!r}"
    )

if _forced == "python":
    from . import _smo_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _smo as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        from . import _smo_py as _impl

        BACKEND = "python"

smo_solve = _impl.smo_solve
