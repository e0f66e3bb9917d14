"""Kernel selection: the compiled extension when it imports, else the pure module.

Set ``WLT_PURE=1`` to force the pure-Python fallback.
"""
import os

from . import _kernels as pure

compiled = None
if os.environ.get("WLT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None

impl = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

merge_code = impl.merge_code
merge_reports = impl.merge_reports
join_branches = impl.join_branches
var_split_ok = impl.var_split_ok
split_ok = impl.split_ok

UNUSED, UNR, HIDDEN, LINEAR = pure.UNUSED, pure.UNR, pure.HIDDEN, pure.LINEAR
SPLIT, PSEUDO = pure.SPLIT, pure.PSEUDO
ABSENT, QLI, QUN, QHI = pure.ABSENT, pure.QLI, pure.QUN, pure.QHI
ERR_TWICE, ERR_AFTER, ERR_MIXED, ERR_KIND, ERR_BRANCH = (
    pure.ERR_TWICE, pure.ERR_AFTER, pure.ERR_MIXED, pure.ERR_KIND, pure.ERR_BRANCH)
