"""Context-aware query routing for unstructured P2P file sharing over MANETs.

Modules: ``mcdm`` (TOPSIS and AHP), ``context`` (neighbor features),
``protocol`` (per-peer routing), ``netsim`` (discrete-event simulator),
``workload`` (synthetic corpus and queries), ``metrics`` and ``cli``.
"""

from .errors import ValidationError
from .mcdm import ahp_weights, topsis_rank

__version__ = "0.1.0"

__all__ = ["ValidationError", "ahp_weights", "topsis_rank", "__version__"]
