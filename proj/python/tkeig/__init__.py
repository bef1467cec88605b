"""Top-K eigenpairs of large sparse symmetric matrices."""

from ._core import (
    ContractViolation,
    CsrMatrix,
    Error,
    FormatError,
    InvalidConfigError,
    InvalidPartitionError,
    ParseError,
    StructuralError,
    dense_oracle,
    eigenvalue_deviation,
    ill_conditioned,
    jacobi_eigen,
    load_matrix,
    matrix_stats,
    parse_matrix_market,
    partition_by_nnz,
    random_symmetric,
    read_binary,
    solve_topk,
    write_binary,
    write_matrix_market,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
