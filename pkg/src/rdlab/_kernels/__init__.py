"""Kernel backend selection: compiled extension if available, else the
pure-Python reference. RDLAB_PURE=1 forces the reference backend."""

import os

from . import reference

if os.environ.get("RDLAB_PURE") == "1":
    _impl = reference
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = reference

BACKEND = _impl.BACKEND

EV_ACT = reference.EV_ACT
EV_REFRESH_ROW = reference.EV_REFRESH_ROW
EV_COUNTER_RESET = reference.EV_COUNTER_RESET

prfm_max_hammer = _impl.prfm_max_hammer
prfm_best = _impl.prfm_best
prac_rounds = _impl.prac_rounds
prac_best = _impl.prac_best
oracle_scan = _impl.oracle_scan
