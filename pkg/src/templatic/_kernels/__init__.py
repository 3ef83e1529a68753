"""Hot numeric kernels with a compiled fast path.

The compiled Cython extension is used when it was built; otherwise the
pure-Python fallback is selected at import time. Setting the environment
variable ``TEMPLATIC_PURE=1`` forces the fallback (used by the benchmark
and the equivalence tests).
"""

from __future__ import annotations

import os

from . import _pure

HAVE_SPEEDUPS = False
_impl = _pure

if os.environ.get("TEMPLATIC_PURE") != "1":
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        HAVE_SPEEDUPS = True
    except ImportError:
        pass

lcs_length = _impl.lcs_length

__all__ = ["lcs_length", "HAVE_SPEEDUPS"]
