"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twins in ``_pykernels`` take over. Set ``DPGRAPHGEN_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("DPGRAPHGEN_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend forced by environment")
    from . import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

BACKEND = "compiled" if compiled_backend is not None else "python"
_impl = compiled_backend if compiled_backend is not None else python_backend

triangles_per_node = _impl.triangles_per_node
bfs_distance_counts = _impl.bfs_distance_counts
max_common_neighbors = _impl.max_common_neighbors
hrg_edge_counts = _impl.hrg_edge_counts
hrg_loglik = _impl.hrg_loglik
hrg_mcmc = _impl.hrg_mcmc


def backends():
    """Available backends by name, compiled first when present."""
    out = {}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    out["python"] = python_backend
    return out
