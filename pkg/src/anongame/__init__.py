"""Approximate equilibria of anonymous games."""

from .errors import (
    InternalConsistencyError,
    InvalidArgument,
    ParseError,
    PreconditionError,
    ResourceLimitError,
)
from .game import (
    AnonymousGame,
    expected_payoff,
    expected_payoffs,
    generate_game,
    max_regret,
    regret,
    regrets,
    verify_well_supported,
)
from .io import load_game, load_profile, save_game, save_profile
from .partitions import enumerate_partitions
from .pmd import pmd_pmf, tv_distance
from .smoothing import solve_smooth

__version__ = "0.1.0"
