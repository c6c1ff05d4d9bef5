"""Edge-DP synthetic graph generators with a query/metric benchmark harness."""

__version__ = "0.1.0"

from .graph import Graph, load_edge_list, write_edge_list  # noqa: E402
from .privacy import PrivacyBudget  # noqa: E402
from .queries import QueryId, evaluate  # noqa: E402
from .synth import ALGORITHMS, Synthesizer, generate  # noqa: E402

__all__ = ["ALGORITHMS", "Graph", "PrivacyBudget", "QueryId", "Synthesizer", "__version__", "evaluate",
           "generate", "load_edge_list", "write_edge_list"]
