"""Select the numerical backend at import time.

The compiled extension is preferred when present; installs where the build
was skipped (no compiler, no Cython) fall back to the numpy implementation
transparently. Override with the environment variable ``CROWSIM_BACKEND``:

- ``auto`` (default): compiled if importable, else pure Python;
- ``cython``: require the compiled extension, raise if missing;
- ``python``: force the fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os
import warnings

from . import _kernels_py

_requested = os.environ.get("CROWSIM_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "cython", "python"):
    warnings.warn(
        f"CROWSIM_BACKEND={_requested!r} not recognized "
        "(expected auto/cython/python); using auto",
        RuntimeWarning,
        stacklevel=2,
    )
    _requested = "auto"

if _requested == "python":
    _impl = _kernels_py
    backend_name = "python"
else:
    try:
        from . import _kernels as _compiled
    except ImportError as exc:
        if _requested == "cython":
            raise ImportError(
                "CROWSIM_BACKEND=cython but the compiled extension is not "
                "available; reinstall with a working C compiler or unset the "
                "override"
            ) from exc
        _impl = _kernels_py
        backend_name = "python"
    else:
        _impl = _compiled
        backend_name = "cython"

u_recurrence = _impl.u_recurrence
v_accumulate = _impl.v_accumulate
