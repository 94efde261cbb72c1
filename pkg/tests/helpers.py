"""Shared oracles: reconstruct a decimation rule as a dense operator."""

import numpy as np

# one pass/fail line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES: list[str] = []

from xxladder.rules import cell_operator, vertical_operator


def rule_effective_operator(rule, jl: float, jr: float) -> np.ndarray:
    """Dense 16x16 two-rung operator a rule predicts (interior v = 0).

    The decimated bond has unit strength, so c = 1 for J-kind rules and
    c = 2 for p-kind (the rule normalization uses p = 2 * stored v).
    """
    c = 1.0 if rule.kind == "J" else 2.0
    scalar = (rule.shift_const * c + rule.shift_l2 * jl * jl / c
              + rule.shift_r2 * jr * jr / c)
    out = scalar * np.eye(16, dtype=complex)
    if rule.new_type >= 0 and rule.amp != 0:
        out = out + cell_operator(rule.new_type, rule.amp * jl * jr / c,
                                  0, 1, 2)
    if rule.lvb != 0:
        out = out + (rule.lvb * jl * jl / c) * vertical_operator(0, 2)
    if rule.rvb != 0:
        out = out + (rule.rvb * jr * jr / c) * vertical_operator(1, 2)
    return out


def full_block_operator(kind: str, context, jl: float, jr: float) -> np.ndarray:
    """Exact operator on the decimation block with neighbor couplings."""
    if kind == "J":
        l, c, r = context
        n = 4
        full = cell_operator(c, 1.0, 1, 2, n)
        full = full + cell_operator(l, jl, 0, 1, n)
        full = full + cell_operator(r, jr, 2, 3, n)
    else:
        l, r = context
        n = 3
        full = vertical_operator(1, n)
        full = full + cell_operator(l, jl, 0, 1, n)
        full = full + cell_operator(r, jr, 1, 2, n)
    return full


def rule_oracle_error(rule, eps: float, weights=(0.9, 0.7)) -> float:
    """Worst distance from predicted to exact block eigenvalues.

    Second-order perturbation theory is exact through eps^2, so this
    distance must scale as eps^3.
    """
    jl, jr = eps * weights[0], eps * weights[1]
    exact = np.linalg.eigvals(full_block_operator(rule.kind, rule.context,
                                                  jl, jr))
    pred = np.linalg.eigvals(rule_effective_operator(rule, jl, jr))
    return float(max(np.min(np.abs(exact - lam)) for lam in pred))
