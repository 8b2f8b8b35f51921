"""Backend selection for the Newton-basis kernels.

The compiled extension is preferred. Setting ``PMBO_PURE_PYTHON=1`` forces the
numpy fallback, which is also used when the extension was not built.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("PMBO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

newton_basis = _impl.newton_basis
newton_eval = _impl.newton_eval
newton_grad = _impl.newton_grad
newton_eval_grad = _impl.newton_eval_grad
box_pgd = _impl.box_pgd

__all__ = ["BACKEND", "newton_basis", "newton_eval", "newton_grad", "newton_eval_grad", "box_pgd"]
