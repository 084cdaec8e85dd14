"""Hot kernels, compiled when available.

The Cython extension is used if it was built; otherwise, or when the
environment variable ``MORPHKERN_PURE=1`` is set, the numpy fallback is
used. ``BACKEND`` names the active one.
"""

import os

from . import fallback

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("MORPHKERN_PURE", "0") not in ("1", "true", "yes"):
    _impl = compiled
else:
    _impl = fallback

BACKEND = _impl.BACKEND
gaussian_cross = _impl.gaussian_cross
idw_weights = _impl.idw_weights
points_in_rings = _impl.points_in_rings

__all__ = ["BACKEND", "compiled", "fallback", "gaussian_cross", "idw_weights", "points_in_rings"]
