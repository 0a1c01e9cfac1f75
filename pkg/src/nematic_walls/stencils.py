"""Kernel backend selection.

The compiled extension (_stencils, built from _stencils.pyx) is preferred;
the pure-numpy module (_stencils_py) is the drop-in fallback.  Set
NEMATIC_WALLS_PURE_PYTHON=1 to force the fallback, e.g. for benchmarking.
"""

from __future__ import annotations

import os

from . import _stencils_py as _py

_compiled = None
if not os.environ.get("NEMATIC_WALLS_PURE_PYTHON"):
    try:
        from . import _stencils as _compiled  # type: ignore
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _py
BACKEND = "compiled" if _compiled is not None else "python"

rect_node_weights = _py.rect_node_weights
polar_node_weights = _py.polar_node_weights
rect_grad_form = _impl.rect_grad_form
rect_grad_op = _impl.rect_grad_op
rect_div_form = _impl.rect_div_form
rect_div_op = _impl.rect_div_op
polar_grad_form = _impl.polar_grad_form
polar_grad_op = _impl.polar_grad_op
polar_div_form = _impl.polar_div_form
polar_div_op = _impl.polar_div_op

python_impl = _py
compiled_impl = _compiled
