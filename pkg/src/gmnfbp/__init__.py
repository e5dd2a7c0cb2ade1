"""Min-sum belief propagation for generalized minimum-cost network flow (GMNF).

Exact rational arithmetic throughout by default; see :mod:`gmnfbp.scalar`.
"""

from .errors import GenerationError, GmnfError, SizeLimitError, UsageError
from .model import GmnfInstance, load_instance, read_instance, validate, write_instance
from .generate import generate_instance
from .oracle import is_unique, solve_exact
from .bp import run as run_bp
from .pipeline import analyze, certify

__all__ = [
    "GmnfError", "UsageError", "SizeLimitError", "GenerationError",
    "GmnfInstance", "load_instance", "read_instance", "write_instance", "validate",
    "generate_instance", "solve_exact", "is_unique", "run_bp", "analyze", "certify",
]

__version__ = "0.1.0"
