"""
Exact expected fixation time on small cycles.

The discrete-time chain picks an active particle uniformly, then jumps it
left or right with probability 1/(2(1+lam)) each or attempts a sleep with
probability lam/(1+lam) (which only succeeds on a lone particle). Every
attempt counts toward T. The reachable state graph is enumerated
breadth-first and E[T | s] = 1 + sum_s' P(s, s') E[T | s'] is solved
directly: with scipy's sparse solver always, and additionally in exact
rationals when the chain is small enough.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.linalg import spsolve

from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import NoAbsorptionError, StateSpaceTooLargeError
from arw_fixation.core.rules import apply_code
from arw_fixation.core.schema import Configuration
from arw_fixation.core.stack import JUMP_LEFT, JUMP_RIGHT, SLEEP

logger = logging.getLogger(__name__)

StateKey = Tuple[int, ...]
# (target state, number of active particles at the chosen site, instruction code)
Edge = Tuple[int, int, int]


@dataclass
class OracleResult:
    """
    Exact expectation of T from one initial configuration.

    Attributes:
        expected_T: Exact rational value, or None when the chain was too
            large for the rational solve
        expected_T_float: Floating-point value from the sparse solve
        state_count: Number of reachable states (transient and stable)
    """
    expected_T: Optional[Fraction]
    expected_T_float: float
    state_count: int

    @property
    def exact(self) -> bool:
        return self.expected_T is not None


def _from_key(key: StateKey) -> Configuration:
    config = Configuration(len(key))
    for x, k in enumerate(key):
        if k < 0:
            config.sleepy[x] = True
        else:
            config.active[x] = k
    config.particle_total = config.recount()
    return config


def _enumerate(
    start: Configuration, max_states: int
) -> Tuple[List[StateKey], Dict[int, List[Edge]]]:
    """Breadth-first enumeration; edges are listed for transient states only."""
    keys: List[StateKey] = [start.key()]
    index = {keys[0]: 0}
    edges: Dict[int, List[Edge]] = {}
    queue = deque([0])

    while queue:
        s = queue.popleft()
        key = keys[s]
        if not any(k > 0 for k in key):
            continue
        out: List[Edge] = []
        for x, k in enumerate(key):
            if k <= 0:
                continue
            for code in (JUMP_LEFT, JUMP_RIGHT, SLEEP):
                config = _from_key(key)
                apply_code(config, x, code)
                target = config.key()
                t = index.get(target)
                if t is None:
                    if len(keys) >= max_states:
                        raise StateSpaceTooLargeError(max_states)
                    t = len(keys)
                    index[target] = t
                    keys.append(target)
                    queue.append(t)
                out.append((t, k, code))
        edges[s] = out
    return keys, edges


def _solve_float(
    transient: List[int], edges: Dict[int, List[Edge]], keys: List[StateKey], lam: float
) -> np.ndarray:
    position = {s: i for i, s in enumerate(transient)}
    p_move = 0.5 / (1.0 + lam)
    p_sleep = lam / (1.0 + lam)
    rows, cols, vals = [], [], []
    for s in transient:
        active = sum(k for k in keys[s] if k > 0)
        for t, k, code in edges[s]:
            col = position.get(t)
            if col is None:
                continue
            rows.append(position[s])
            cols.append(col)
            vals.append((k / active) * (p_sleep if code == SLEEP else p_move))
    size = len(transient)
    P = csr_matrix((vals, (rows, cols)), shape=(size, size))
    A = (identity(size, format="csr") - P).tocsc()
    return np.atleast_1d(spsolve(A, np.ones(size)))


def _solve_rational(
    transient: List[int], edges: Dict[int, List[Edge]], keys: List[StateKey], lam: Fraction
) -> List[Fraction]:
    """Sparse Gaussian elimination of (I - P) E = 1 over the rationals."""
    position = {s: i for i, s in enumerate(transient)}
    p_move = Fraction(1, 2) / (1 + lam)
    p_sleep = lam / (1 + lam)
    size = len(transient)
    rows: List[Dict[int, Fraction]] = []
    rhs = [Fraction(1)] * size

    for s in transient:
        active = sum(k for k in keys[s] if k > 0)
        row: Dict[int, Fraction] = {position[s]: Fraction(1)}
        for t, k, code in edges[s]:
            col = position.get(t)
            if col is None:
                continue
            p = Fraction(k, active) * (p_sleep if code == SLEEP else p_move)
            row[col] = row.get(col, Fraction(0)) - p
        rows.append({c: v for c, v in row.items() if v != 0})

    # (I - P) restricted to transient states is a nonsingular M-matrix: no pivoting needed
    for i in range(size):
        pivot_row = rows[i]
        pivot = pivot_row[i]
        for r in range(i + 1, size):
            factor = rows[r].get(i)
            if factor is None:
                continue
            factor /= pivot
            target = rows[r]
            for c, v in pivot_row.items():
                updated = target.get(c, Fraction(0)) - factor * v
                if updated:
                    target[c] = updated
                else:
                    target.pop(c, None)
            rhs[r] -= factor * rhs[i]

    solution = [Fraction(0)] * size
    for i in range(size - 1, -1, -1):
        acc = rhs[i] - sum(v * solution[c] for c, v in rows[i].items() if c > i)
        solution[i] = acc / rows[i][i]
    return solution


def exact_expected_T(
    n: int,
    initial_config: Configuration,
    lam: float,
    max_states: Optional[int] = None,
    rational_max_states: Optional[int] = None,
) -> OracleResult:
    """
    Solve for the exact expected number of attempts until fixation.

    Args:
        n: Cycle size (must match the configuration)
        initial_config: Starting configuration
        lam: Sleep rate
        max_states: Enumeration cap (default ARW_ORACLE_MAX_STATES)
        rational_max_states: Largest transient chain solved in rationals
            (default ARW_RATIONAL_MAX_STATES)

    Returns:
        OracleResult for the starting configuration

    Raises:
        NoAbsorptionError: If there are more particles than sites
        StateSpaceTooLargeError: If enumeration passes max_states
    """
    max_states = arw_config.ORACLE_MAX_STATES if max_states is None else max_states
    if rational_max_states is None:
        rational_max_states = arw_config.RATIONAL_MAX_STATES
    if initial_config.n != n:
        raise ValueError(f"Configuration has {initial_config.n} sites, expected {n}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive (got {lam})")
    particles = initial_config.recount()
    if particles > n:
        raise NoAbsorptionError(f"{particles} particles on {n} sites can never all sleep")

    keys, edges = _enumerate(initial_config, max_states)
    transient = sorted(edges)
    logger.debug(f"Oracle chain: {len(keys)} states, {len(transient)} transient")

    if 0 not in edges:
        return OracleResult(expected_T=Fraction(0), expected_T_float=0.0, state_count=len(keys))

    expected_float = float(_solve_float(transient, edges, keys, lam)[0])
    expected = None
    if len(transient) <= rational_max_states:
        expected = _solve_rational(transient, edges, keys, Fraction(str(lam)))[0]
        expected_float = float(expected)

    return OracleResult(expected_T=expected, expected_T_float=expected_float, state_count=len(keys))
