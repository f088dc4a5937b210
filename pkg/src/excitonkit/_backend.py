"""Backend selection: compiled extension if available, numpy fallback otherwise.

Set EXCITONKIT_PURE_PYTHON=1 to force the fallback (used by the parity tests
and the benchmark).  The selected module is fixed at import time.
"""

import os

from . import _purepy

if os.environ.get("EXCITONKIT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _purepy
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _purepy
        BACKEND = "python"

rk4_evolve = _impl.rk4_evolve
site_conditional_entropies = _impl.site_conditional_entropies
pair_conditional_entropies = _impl.pair_conditional_entropies
lindblad_apply = _purepy.lindblad_apply


def backend_name():
    """Return "compiled" or "python" for the active kernel set."""
    return BACKEND
