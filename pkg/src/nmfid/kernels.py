"""Kernel backend selection.

The compiled extension is used when it imports cleanly; setting
``NMFID_PURE_PYTHON=1`` forces the reference implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("NMFID_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py

int_rank = _impl.int_rank
mu_run = _impl.mu_run


def get_backend(name=None):
    """Return a kernel namespace by name (``"python"`` or ``"compiled"``)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def thread_cap():
    """Upper bound on worker threads, from ``NMFID_THREADS`` (default 1)."""
    raw = os.environ.get("NMFID_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
