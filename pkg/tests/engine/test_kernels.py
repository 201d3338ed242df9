"""Tests for the compiled toppling kernels."""

import numpy as np
from sortedcontainers import SortedSet

from arw_fixation.core.rules import EFFECT_ILLEGAL, EFFECT_NOOP, EFFECT_SLEPT, apply_code_arrays
from arw_fixation.core.stack import BLOCK_SIZE, JUMP_LEFT, JUMP_RIGHT, SLEEP
from arw_fixation.engine import kernels


def _index(n, sites):
    tree = np.zeros(n + 1, dtype=np.int64)
    member = np.zeros(n, dtype=np.bool_)
    counters = kernels.new_counters(0)
    eligible = np.zeros(n, dtype=np.bool_)
    eligible[list(sites)] = True
    kernels.index_build(tree, member, counters, eligible)
    return tree, member, counters


def test_index_selects_by_rank_like_sorted_set():
    """Rank selection and counting agree with a SortedSet of the same sites."""
    sites = [1, 4, 5, 9, 12]
    tree, member, counters = _index(13, sites)
    reference = SortedSet(sites)
    assert counters[kernels.C_SIZE] == len(sites)
    assert [kernels.index_select(tree, k) for k in range(len(sites))] == list(reference)
    for x in range(14):
        assert kernels.index_count_below(tree, x) == reference.bisect_left(x)


def test_index_insert_and_remove_are_idempotent():
    """Adding a member twice or removing a non-member changes nothing."""
    tree, member, counters = _index(8, [2, 6])
    kernels.index_insert(tree, member, counters, 2)
    kernels.index_remove(tree, member, counters, 3)
    assert counters[kernels.C_SIZE] == 2
    kernels.index_remove(tree, member, counters, 2)
    kernels.index_insert(tree, member, counters, 0)
    assert [kernels.index_select(tree, k) for k in range(2)] == [0, 6]


def test_compiled_rule_wraps_and_wakes():
    """Jumps wrap around the cycle and wake a sleeper at the destination."""
    active = np.array([1, 0, 0, 0], dtype=np.int64)
    sleepy = np.array([False, False, False, True])
    assert apply_code_arrays(active, sleepy, 0, JUMP_LEFT) == 3
    assert active.tolist() == [0, 0, 0, 2]
    assert not sleepy[3]
    assert apply_code_arrays(active, sleepy, 3, JUMP_RIGHT) == 0
    assert active.tolist() == [1, 0, 0, 1]


def test_compiled_rule_sleep_needs_a_lone_particle():
    """Sleep succeeds alone, is a no-op with company and illegal on empty sites."""
    active = np.array([1, 2, 0], dtype=np.int64)
    sleepy = np.zeros(3, dtype=np.bool_)
    assert apply_code_arrays(active, sleepy, 1, SLEEP) == EFFECT_NOOP
    assert apply_code_arrays(active, sleepy, 0, SLEEP) == EFFECT_SLEPT
    assert sleepy[0] and active[0] == 0
    assert apply_code_arrays(active, sleepy, 2, SLEEP) == EFFECT_ILLEGAL


def _walk_arrays(half):
    width = 2 * half + 1
    rows = np.full((width, BLOCK_SIZE), JUMP_RIGHT, dtype=np.int8)
    row_block = np.zeros(width, dtype=np.int64)
    pointer = np.ones(width, dtype=np.int64)
    pending = np.zeros(width, dtype=np.bool_)
    candidate = np.full(width, -1, dtype=np.int64)
    walk = np.zeros(kernels.WALK_SLOTS, dtype=np.int64)
    return rows, row_block, pointer, pending, candidate, walk


def test_explore_marks_sleep_before_exit():
    """A sleep read just before a jump makes that site a candidate."""
    rows, row_block, pointer, pending, candidate, walk = _walk_arrays(2)
    rows[2, 0] = SLEEP
    status = kernels.explore(rows, row_block, pointer, pending, candidate, -2, 2, 2, walk, 100)
    assert status == kernels.STATUS_DONE
    assert walk[kernels.WALK_POS] == 2
    assert walk[kernels.WALK_STEPS] == 3
    assert list(candidate) == [-1, -1, 1, -1, -1]
    assert list(pointer) == [1, 1, 3, 2, 1]


def test_explore_stops_for_a_refill_and_resumes():
    """An unloaded block stops the walk at that site; reloading lets it finish."""
    rows, row_block, pointer, pending, candidate, walk = _walk_arrays(2)
    rows[3, 0] = JUMP_LEFT
    row_block[3] = -1
    status = kernels.explore(rows, row_block, pointer, pending, candidate, -2, 2, 2, walk, 100)
    assert status == kernels.STATUS_REFILL
    assert walk[kernels.WALK_REFILL] == walk[kernels.WALK_POS] == 1
    assert walk[kernels.WALK_STEPS] == 1

    row_block[3] = 0
    rows[3, 0] = JUMP_RIGHT
    status = kernels.explore(rows, row_block, pointer, pending, candidate, -2, 2, 2, walk, 100)
    assert status == kernels.STATUS_DONE
    assert walk[kernels.WALK_POS] == 2
    assert walk[kernels.WALK_STEPS] == 2


def test_explore_read_cap():
    """The cap is checked after each jump."""
    rows, row_block, pointer, pending, candidate, walk = _walk_arrays(4)
    status = kernels.explore(rows, row_block, pointer, pending, candidate, -4, 4, 4, walk, 2)
    assert status == kernels.STATUS_BUDGET
    assert walk[kernels.WALK_POS] == 2
    assert walk[kernels.WALK_STEPS] == 2
