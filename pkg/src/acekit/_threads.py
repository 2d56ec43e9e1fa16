"""Thread-cap handling for the ACE_THREADS environment variable.

ACE_THREADS caps the BLAS/LAPACK thread pools numpy and scipy dispatch to;
ACE_THREADS=1 activates the bit-level determinism contract. Applied once at
package import when the variable is set, and held for the process lifetime.
"""

from __future__ import annotations

import os

_controller = None


def apply_thread_cap() -> int | None:
    """Read ACE_THREADS and cap the native thread pools accordingly.

    Returns the applied cap, or None when the variable is unset or invalid.
    """
    global _controller
    raw = os.environ.get("ACE_THREADS")
    if not raw:
        return None
    try:
        limit = int(raw)
    except ValueError:
        return None
    if limit < 1:
        return None
    import threadpoolctl

    _controller = threadpoolctl.threadpool_limits(limits=limit)
    return limit
