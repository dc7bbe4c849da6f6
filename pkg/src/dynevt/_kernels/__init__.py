"""Kernel backend selection.

The compiled Cython extension (`_core`) is preferred; the pure-numpy
implementation (`_pure`) is the fallback when the extension was not built.
Set the environment variable ``DYNEVT_PURE=1`` before import to force the
fallback (used by the parity tests and the backend benchmark).
"""

import os

if os.environ.get("DYNEVT_PURE"):
    from dynevt._kernels import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from dynevt._kernels import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from dynevt._kernels import _pure as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

XI_ZERO_EPS = _impl.XI_ZERO_EPS
XI_LO_DEFAULT = _impl.XI_LO_DEFAULT
XI_HI_DEFAULT = _impl.XI_HI_DEFAULT

gpd_nll = _impl.gpd_nll
fit_gpd = _impl.fit_gpd
evt_var = _impl.evt_var
brt_scan = _impl.brt_scan
garch_filter = _impl.garch_filter
egarch_filter = _impl.egarch_filter
caviar_filter = _impl.caviar_filter


def get_backend(name: str):
    """Return a backend module by name ('compiled' or 'pure')."""
    if name == "pure":
        from dynevt._kernels import _pure

        return _pure
    if name == "compiled":
        from dynevt._kernels import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
