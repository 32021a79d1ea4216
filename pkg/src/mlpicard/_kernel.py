"""Kernel selection: compiled extension if importable, pure Python otherwise.

Set ``MLPICARD_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and by cross-kernel tests).
"""

from __future__ import annotations

import os

from mlpicard import _pykernel

if os.environ.get("MLPICARD_PURE_PYTHON", "") not in ("", "0"):
    impl = _pykernel
else:
    try:
        from mlpicard import _mlpcore as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _pykernel


def backend() -> str:
    """Active kernel backend: "compiled" or "python"."""
    return impl.BACKEND
