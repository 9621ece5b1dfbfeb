"""SAT-based safety model checking: IC3, IC4 and property decomposition."""

from .aiger import AigCircuit, TransitionSystem, encode, load_file, parse_aag
from .ic3 import EngineOptions, prove_ic3
from .ic4 import MAXIMAL, MINIMAL, EffortMode, heuristic, prove_ic4
from .pd import prove_pd
from .results import Trace, Verdict

__all__ = [
    "AigCircuit", "TransitionSystem", "encode", "load_file", "parse_aag",
    "EngineOptions", "prove_ic3",
    "EffortMode", "MINIMAL", "MAXIMAL", "heuristic", "prove_ic4",
    "prove_pd", "Trace", "Verdict",
]

__version__ = "0.1.0"
