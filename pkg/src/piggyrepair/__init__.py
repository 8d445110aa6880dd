"""Piggybacking array codes over prime fields and their linear repair schemes."""
from .base_code import BaseCode, is_mds, make_grs_base, make_rs_base
from .construct import (
    construct_k2_lineback,
    construct_k2_t2,
    fig3_fixture,
    lineback_failure_bound,
    reduce_substripe,
    smallest_prime_for_lineback,
)
from .dual import dual_basis, enumerate_dual, frobenius_check, in_dual
from .errors import (
    BudgetExceeded,
    BudgetExhausted,
    InconsistentRowsError,
    ParameterError,
    SchemeError,
    ShapeError,
)
from .gf import FieldCtx, FieldElement
from .linalg import GfMatrix, GfVector, inverse, kernel_basis, rank, rref, solve
from .piggyback import LINEBACK, PIGGYBACK, Codeword, Message, PiggybackCode, decode_from_k_nodes, encode
from .repair import (
    QueryPlan,
    RepairScheme,
    StandardFormInfo,
    add_last_column,
    add_matrix,
    equivalent,
    download_equivalent,
    execute_repair,
    perfect_bandwidth,
    scale_matrix,
    t2_kappas,
    to_standard_form,
    verify_scheme,
)
from .search import SearchBudget, SearchOutcome, exhaustive_scheme_search, find_scheme, witness_any_d_impossibility
from .sim import ClusterState, RepairReport, fail_and_repair, ingest, read_back

__version__ = "0.1.0"
