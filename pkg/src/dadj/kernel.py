"""Select the polynomial kernel backend.

The compiled ``_ckernel`` extension is used when it was built; otherwise the
pure-Python ``_pykernel`` is used.  Setting ``DADJ_PURE_PYTHON=1`` forces the
fallback (the benchmark uses this to compare both).
"""

import os

if os.environ.get("DADJ_PURE_PYTHON"):
    from ._pykernel import (BACKEND, mono_mul, poly_add, poly_diff, poly_eval,
                            poly_mul, poly_pow, poly_scale, poly_shift)
else:
    try:
        from ._ckernel import (BACKEND, mono_mul, poly_add, poly_diff, poly_eval,
                               poly_mul, poly_pow, poly_scale, poly_shift)
    except ImportError:
        from ._pykernel import (BACKEND, mono_mul, poly_add, poly_diff, poly_eval,
                                poly_mul, poly_pow, poly_scale, poly_shift)

__all__ = ["BACKEND", "mono_mul", "poly_add", "poly_diff", "poly_eval",
           "poly_mul", "poly_pow", "poly_scale", "poly_shift"]
