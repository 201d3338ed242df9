"""Shared test fixtures for arw_fixation tests."""

import pytest

from arw_fixation.core.schema import Configuration, Instruction, Params
from arw_fixation.core.stack import InstructionStack


@pytest.fixture
def small_params():
    """A small subcritical instance that stabilizes quickly."""
    return Params(n=12, mu=0.5, lam=1.0, seed=11)


@pytest.fixture
def lone_particle():
    """One active particle at site 0 of an 8-cycle."""
    return Configuration.from_counts([1, 0, 0, 0, 0, 0, 0, 0])


@pytest.fixture
def seed_where():
    """
    Find the first seed whose raw instruction at (x, j) is `instr`.

    Lets tests pin down what a topple will read without mocking the stack.
    """
    def find(instr: Instruction, x: int = 0, j: int = 1, lam: float = 1.0) -> int:
        for seed in range(10_000):
            if InstructionStack(seed, lam).raw(x, j) == instr:
                return seed
        raise AssertionError(f"No seed with {instr.name} at ({x}, {j})")

    return find
