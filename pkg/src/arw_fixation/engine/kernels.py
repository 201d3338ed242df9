"""
Compiled toppling kernels.

The kernels run on numpy copies of a configuration and its odometer and
read instructions from `rows`, which holds one loaded block of BLOCK_SIZE
codes per site (`row_block[x]` says which). When a site runs past its
loaded block the kernel stops with STATUS_REFILL and the site in
counters[C_REFILL]; the caller loads the block and calls again. Everything
that has to survive such a stop (site index, sweep cursor, a selection not
yet toppled) lives in the arrays passed in, so a run split over many calls
topples exactly the sites an uninterrupted run would.

The unstable-site index is a Fenwick tree over site membership flags, so
selecting the k-th unstable site in site order costs O(log n), as indexing
the engine's SortedSet does.
"""

import numpy as np
from numba import njit

from arw_fixation.core.rules import EFFECT_SLEPT, apply_code_arrays
from arw_fixation.core.stack import BLOCK_SIZE, JUMP_LEFT, SLEEP

STATUS_DONE = 0
STATUS_BUDGET = 1
STATUS_REFILL = 2
STATUS_UNIFORMS = 3

MODE_LEFTMOST = 0
MODE_RANDOM = 1
MODE_SWEEP = 2

# Slots of the int64 counters array
C_T = 0
C_CURSOR = 1
C_UNIFORM = 2
C_REFILL = 3
C_PENDING = 4
C_SIZE = 5
C_BELOW = 6
C_ABOVE = 7
COUNTER_SLOTS = 8

# Slots of the int64 walk array used by explore
WALK_POS = 0
WALK_STEPS = 1
WALK_REFILL = 2
WALK_SLOTS = 3


def new_counters(total_T: int) -> np.ndarray:
    counters = np.zeros(COUNTER_SLOTS, dtype=np.int64)
    counters[C_T] = total_T
    counters[C_PENDING] = -1
    return counters


# ============================================================================
# SITE INDEX
# ============================================================================

@njit(cache=True)
def index_insert(tree, member, counters, x):
    if member[x]:
        return
    member[x] = True
    counters[C_SIZE] += 1
    i = x + 1
    while i < tree.shape[0]:
        tree[i] += 1
        i += i & (-i)


@njit(cache=True)
def index_remove(tree, member, counters, x):
    if not member[x]:
        return
    member[x] = False
    counters[C_SIZE] -= 1
    i = x + 1
    while i < tree.shape[0]:
        tree[i] -= 1
        i += i & (-i)


@njit(cache=True)
def index_count_below(tree, x):
    """Number of indexed sites < x."""
    total = 0
    i = x
    while i > 0:
        total += tree[i]
        i -= i & (-i)
    return total


@njit(cache=True)
def index_select(tree, rank):
    """Indexed site of 0-based rank `rank` in site order."""
    step = 1
    while step * 2 < tree.shape[0]:
        step *= 2
    pos = 0
    remaining = rank + 1
    while step > 0:
        nxt = pos + step
        if nxt < tree.shape[0] and tree[nxt] < remaining:
            pos = nxt
            remaining -= tree[nxt]
        step //= 2
    return pos


@njit(cache=True)
def index_build(tree, member, counters, eligible):
    tree[:] = 0
    member[:] = False
    counters[C_SIZE] = 0
    for x in range(eligible.shape[0]):
        if eligible[x]:
            index_insert(tree, member, counters, x)


# ============================================================================
# ENGINE DRIVE
# ============================================================================

@njit(cache=True)
def drive(active, sleepy, h, rows, row_block, eligible_site, member, tree, mode, uniforms,
          counters, budget):
    """
    Topple policy-selected indexed sites until the index is empty or T hits budget.

    Returns one of the STATUS_* codes; T is kept in counters[C_T].
    """
    T = counters[C_T]
    while counters[C_SIZE] > 0:
        x = counters[C_PENDING]
        if x < 0:
            if T >= budget:
                counters[C_T] = T
                return STATUS_BUDGET
            size = counters[C_SIZE]
            if mode == MODE_RANDOM:
                if counters[C_UNIFORM] >= uniforms.shape[0]:
                    counters[C_T] = T
                    return STATUS_UNIFORMS
                rank = int(uniforms[counters[C_UNIFORM]] * size)
                counters[C_UNIFORM] += 1
            elif mode == MODE_SWEEP:
                rank = index_count_below(tree, counters[C_CURSOR])
                if rank >= size:
                    rank = 0
            else:
                rank = 0
            x = index_select(tree, rank)
            if mode == MODE_SWEEP:
                counters[C_CURSOR] = x + 1

        j = h[x] + 1
        block = (j - 1) // BLOCK_SIZE
        if row_block[x] != block:
            counters[C_PENDING] = x
            counters[C_REFILL] = x
            counters[C_T] = T
            return STATUS_REFILL
        counters[C_PENDING] = -1

        dest = apply_code_arrays(active, sleepy, x, rows[x, j - 1 - block * BLOCK_SIZE])
        h[x] = j
        T += 1
        if active[x] == 0:
            index_remove(tree, member, counters, x)
        if dest >= 0 and eligible_site[dest]:
            index_insert(tree, member, counters, dest)

    counters[C_T] = T
    return STATUS_DONE


# ============================================================================
# LABELLED LOOP STEP
# ============================================================================

@njit(cache=True)
def loop_step(active, sleepy, position, is_x, asleep, head, tail, nxt, active_x, allowed, h,
              rows, row_block, member, tree, far, counters, budget):
    """
    Leftmost-first toppling of allowed sites holding an active X particle.

    Particles at each site form a linked list in arrival order (head, tail,
    nxt). A jump moves the lowest-index active X and wakes every sleeper at
    its destination. Arrivals at `far` (-1 for none) from its left and right
    neighbours are counted in counters[C_BELOW] and counters[C_ABOVE].
    """
    n = active.shape[0]
    below_far = far - 1 if far > 0 else n - 1
    T = counters[C_T]
    while counters[C_SIZE] > 0:
        if T >= budget:
            counters[C_T] = T
            return STATUS_BUDGET
        x = index_select(tree, 0)
        j = h[x] + 1
        block = (j - 1) // BLOCK_SIZE
        if row_block[x] != block:
            counters[C_REFILL] = x
            counters[C_T] = T
            return STATUS_REFILL

        dest = apply_code_arrays(active, sleepy, x, rows[x, j - 1 - block * BLOCK_SIZE])
        h[x] = j
        T += 1

        if dest >= 0:
            mover = -1
            before_mover = -1
            prev = -1
            p = head[x]
            while p >= 0:
                if is_x[p] and not asleep[p] and (mover < 0 or p < mover):
                    mover = p
                    before_mover = prev
                prev = p
                p = nxt[p]
            if before_mover < 0:
                head[x] = nxt[mover]
            else:
                nxt[before_mover] = nxt[mover]
            if tail[x] == mover:
                tail[x] = before_mover
            nxt[mover] = -1

            q = head[dest]
            while q >= 0:
                if asleep[q]:
                    asleep[q] = False
                    if is_x[q]:
                        active_x[dest] += 1
                q = nxt[q]
            if tail[dest] < 0:
                head[dest] = mover
            else:
                nxt[tail[dest]] = mover
            tail[dest] = mover
            position[mover] = dest

            active_x[x] -= 1
            active_x[dest] += 1
            if dest == far:
                if x == below_far:
                    counters[C_BELOW] += 1
                else:
                    counters[C_ABOVE] += 1
            if active_x[x] == 0:
                index_remove(tree, member, counters, x)
            if allowed[dest]:
                index_insert(tree, member, counters, dest)
        elif dest == EFFECT_SLEPT:
            asleep[head[x]] = True
            active_x[x] = 0
            index_remove(tree, member, counters, x)

    counters[C_T] = T
    return STATUS_DONE


# ============================================================================
# TRAP EXPLORATION
# ============================================================================

@njit(cache=True)
def explore(rows, row_block, pointer, pending, candidate, a, b, half, walk, max_steps):
    """
    Walk one particle from walk[WALK_POS] until it reaches barrier a or b.

    Offsets d in [-half, half] are stored at index d + half. Sleeps are read
    and skipped; on each jump candidate[d] becomes the index of the sleep
    read just before it, or -1. Stops with STATUS_BUDGET once the total read
    count in walk[WALK_STEPS] reaches max_steps after a jump.
    """
    pos = walk[WALK_POS]
    steps = walk[WALK_STEPS]
    status = STATUS_DONE
    while pos > a and pos < b:
        i = pos + half
        j = pointer[i]
        block = (j - 1) // BLOCK_SIZE
        if row_block[i] != block:
            walk[WALK_REFILL] = pos
            status = STATUS_REFILL
            break
        code = rows[i, j - 1 - block * BLOCK_SIZE]
        pointer[i] = j + 1
        steps += 1
        if code == SLEEP:
            pending[i] = True
            continue
        candidate[i] = j - 1 if pending[i] else -1
        pending[i] = False
        pos += -1 if code == JUMP_LEFT else 1
        if steps >= max_steps:
            status = STATUS_BUDGET
            break
    walk[WALK_POS] = pos
    walk[WALK_STEPS] = steps
    return status
