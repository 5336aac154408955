"""Kernel lane selection.

The hot numeric kernels exist twice: a compiled Cython extension
(``socaff._kernels_cy``) and a NumPy fallback (``socaff._kernels_py``).
The compiled lane is used when importable; set ``SOCAFF_KERNELS=py`` to
force the fallback, ``SOCAFF_KERNELS=cy`` to require the extension.
"""

import os

from . import _kernels_py

_choice = os.environ.get("SOCAFF_KERNELS", "auto").lower()

if _choice == "py":
    _impl = _kernels_py
    ACTIVE = "python"
elif _choice == "cy":
    from . import _kernels_cy as _impl  # hard requirement, ImportError is the answer

    ACTIVE = "cython"
else:
    try:
        from . import _kernels_cy as _impl

        ACTIVE = "cython"
    except ImportError:
        _impl = _kernels_py
        ACTIVE = "python"

logpdf_weibull = _impl.logpdf_weibull
logpdf_exponential = _impl.logpdf_exponential
logpdf_lognormal = _impl.logpdf_lognormal
logpdf_vonmises = _impl.logpdf_vonmises
weibull_mle_shape = _impl.weibull_mle_shape
lloyd = _impl.lloyd
nearest_centroid = _impl.nearest_centroid
dp_decode = _impl.dp_decode


def lanes():
    """Return the importable kernel lanes as {name: module}."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_cy

        out["cython"] = _kernels_cy
    except ImportError:
        pass
    return out
