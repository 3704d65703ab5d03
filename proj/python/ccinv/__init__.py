"""Sparse matrix inversion by correlated Markov chains.

Thin wrapper over the C++ core: matrices are immutable handles and every estimate
comes back as the same run-report dictionary the command-line tool writes.
"""

import json

from ._ccinv import (
    BreakdownError,
    ConvergenceError,
    DivergenceError,
    Error,
    InsufficientSamples,
    InvalidArgument,
    IoError,
    Matrix,
    NegativeDiagonalError,
    SingularMatrixError,
    ZeroDiagonalError,
    dirac,
    effective_length,
    exact_trace,
    mc_std_error,
    precheck,
    wu_schaeffer,
)
from ._ccinv import _run

__all__ = [
    "BreakdownError",
    "ConvergenceError",
    "DivergenceError",
    "Error",
    "InsufficientSamples",
    "InvalidArgument",
    "IoError",
    "Matrix",
    "NegativeDiagonalError",
    "SingularMatrixError",
    "ZeroDiagonalError",
    "dirac",
    "effective_length",
    "estimate",
    "exact_trace",
    "mc_std_error",
    "precheck",
    "wu_schaeffer",
]


def estimate(
    matrix,
    method="cc",
    *,
    diag=None,
    entries=(),
    noise="z2",
    seed=1,
    tol=5e-5,
    abs_tol=0.0,
    max_cycles=50_000_000,
    check_interval=100,
    replicates=1,
    jobs=1,
    burn_in_tol=5e-5,
    burn_in_max=100_000,
    inner="bicg",
    inner_tol=5e-5,
    inner_max=100_000,
    force=False,
    precheck=True,
    label="python",
):
    """Run one experiment and return its report as a dict.

    method is "cc", "gs", "se" or "oracle". diag restricts the trace to the listed
    diagonal indices; entries switches to element-wise estimates of C^-1. Complex
    values in the report are {"re": ..., "im": ...} objects.
    """
    text = _run(
        matrix, method, None if diag is None else list(diag), [tuple(e) for e in entries],
        noise, seed, tol, abs_tol, max_cycles, check_interval, replicates, jobs,
        burn_in_tol, burn_in_max, inner, inner_tol, inner_max, force, precheck, label,
    )
    return json.loads(text)
