"""Kernel dispatch.

The compiled extension is used when it imports; otherwise the numpy fallback.
Setting ``LT_ANALYZER_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("LT_ANALYZER_PURE", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

peel_csr = _impl.peel_csr
transfer_row = _impl.transfer_row
sample_subsets = _impl.sample_subsets
