"""Multi-instance verifiable partially homomorphic time-lock puzzles."""
from .fieldpoly import (
    DensePoly, FieldContext, PointValuePoly, field_ctx_new, find_roots, interpolate, poly_eval,
    scale_points, setup_field,
)
from .primitives import (
    BASE, COORD, KDF, Commitment, RsaKeypair, SquaringReport, commit, prf, prf_nonzero, rsa_keygen,
    sequential_square, trapdoor_power, verify_commit,
)
from .ole import ideal_ole, ole_plus
from .mhtlp import (
    EvalGrant, EvalPuzzle, MasterKeyChain, PuzzleChain, SolutionBundle, TimeSchedule, evaluate,
    gen_puzzle, solve_chain, solve_evaluation, verify_client_solution, verify_evaluation,
)
from .mmhtlp import LeaderConfig, McClient, evaluate_mc, select_leaders, solve_mc, verify_mc

__version__ = "0.1.0"
