# Numeric defaults and environment lookups
import os
from dataclasses import dataclass

DEFAULT_SOLVER_TOL = 1e-10
DEFAULT_MAX_ITERATIONS = 100
DEFAULT_RESTARTS = 8
DEFAULT_CONVEXITY_TOL = 1e-8
DEFAULT_ORACLE_TOL = 1e-6
DEGENERATE_IMAG = 1e-9

# Twice the volume of the regular ideal octahedron: the unfilled link complement.
UNFILLED_VOLUME = 7.32772475342


@dataclass(frozen=True)
class Settings:
    seed: int = 0
    log_level: str = "WARNING"
    solver_tol: float = DEFAULT_SOLVER_TOL
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    restarts: int = DEFAULT_RESTARTS
    convexity_tol: float = DEFAULT_CONVEXITY_TOL
    oracle_tol: float = DEFAULT_ORACLE_TOL

    @classmethod
    def from_env(cls) -> "Settings":
        """Read CANON_SEED and CANON_LOG_LEVEL, falling back to the defaults."""
        raw_seed = os.environ.get("CANON_SEED", "0").strip()
        try:
            seed = int(raw_seed)
        except ValueError:
            raise ValueError(f"CANON_SEED must be an integer, got {raw_seed!r}.")
        level = os.environ.get("CANON_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"
        return cls(seed=seed, log_level=level)
