"""Backend selection for the stepping kernels.

Prefers the compiled extension; falls back to the NumPy implementation when
the extension is missing or when PMELAB_BACKEND=python is set. Both expose
the same functions and status codes (see ``_kernels_py``).
"""

import os

if os.environ.get("PMELAB_BACKEND", "").lower() == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

STATUS_OK = _impl.STATUS_OK
STATUS_UNSTABLE = _impl.STATUS_UNSTABLE
STATUS_STEP_BUDGET = _impl.STATUS_STEP_BUDGET

explicit_step = _impl.explicit_step
explicit_advance = _impl.explicit_advance


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'python')."""
    return BACKEND
