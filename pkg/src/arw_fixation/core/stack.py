"""
Deterministic instruction stacks (Diaconis-Fulton representation).

Instruction (x, j) is a pure function of (seed, x, j, lambda): it is read
from a Philox counter-based stream whose key is derived from the seed and
whose counter encodes (site, block). Only the most recently read block of
each site is kept; any other block is regenerated on demand, so two
toppling orders always see the byte-identical stack.

Usage:
    stack = InstructionStack(seed=7, lam=1.0)
    stack.draw(5, 3)                      # Instruction at site 5, index 3
    masked = stack.masked(0.5, mask_seed=1)   # nulls each Sleep w.p. 1/2
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from arw_fixation.core.errors import InvalidMaskError
from arw_fixation.core.schema import Instruction


# ============================================================================
# STREAM TAGS
# ============================================================================

# Distinct tags keep every consumer of a master seed on its own stream
STREAM_INSTRUCTIONS = 1
STREAM_INITIAL = 2
STREAM_POLICY = 3
STREAM_MASK = 4
STREAM_TRIALS = 5

BLOCK_SIZE = 256

JUMP_LEFT = int(Instruction.JUMP_LEFT)
JUMP_RIGHT = int(Instruction.JUMP_RIGHT)
SLEEP = int(Instruction.SLEEP)
NULL = int(Instruction.NULL)

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(master: int, *words: int) -> int:
    """Domain-separated 64-bit seed from a master seed and integer words."""
    ss = np.random.SeedSequence(int(master) & _MASK64, spawn_key=tuple(int(w) for w in words))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_rng(seed: int, tag: int, *words: int) -> np.random.Generator:
    """Philox generator for a tagged sub-stream of `seed`."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(tag, *words))
    return np.random.Generator(np.random.Philox(ss))


def _philox_key(seed: int, *tags: int) -> int:
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tags)
    lo, hi = (int(w) for w in ss.generate_state(2, dtype=np.uint64))
    return lo | (hi << 64)


def _block_uniforms(key: int, x: int, block: int) -> np.ndarray:
    # Lowest counter word is left free for the generator's own increments
    counter = (x << 128) | (block << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter)).random(BLOCK_SIZE)


def _by_site(pairs: FrozenSet[Tuple[int, int]]) -> Dict[int, List[int]]:
    grouped: Dict[int, List[int]] = {}
    for x, j in pairs:
        grouped.setdefault(x, []).append(j)
    return grouped


# ============================================================================
# INSTRUCTION STACK
# ============================================================================

@dataclass(frozen=True)
class InstructionStack:
    """
    Per-site i.i.d. instruction array with optional sleep masking.

    A Sleep draw at (x, j) becomes NULL when any of these hold:
    - (x, j) is in `mask` (explicit; must name Sleep draws only)
    - (x, j) is not in `spared` and j <= mask_prefix[x]
    - (x, j) is not in `spared` and its mask coin falls below `mask_fraction`
    Jumps are never masked.
    """
    seed: int
    lam: float
    mask: FrozenSet[Tuple[int, int]] = frozenset()
    mask_fraction: float = 0.0
    mask_seed: int = 0
    mask_prefix: Optional[Tuple[int, ...]] = None
    spared: FrozenSet[Tuple[int, int]] = frozenset()
    # site -> (block, codes) and (mask_seed, site) -> (block, coins); shared by derived stacks
    _blocks: Dict[int, Tuple[int, List[int]]] = field(
        default_factory=dict, repr=False, compare=False
    )
    _coins: Dict[Tuple[int, int], Tuple[int, np.ndarray]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive (got {self.lam})")
        if not 0.0 <= self.mask_fraction <= 1.0:
            raise ValueError(f"mask_fraction must lie in [0, 1] (got {self.mask_fraction})")
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "_key", _philox_key(self.seed, STREAM_INSTRUCTIONS))
        object.__setattr__(self, "_mask_key", _philox_key(self.seed, STREAM_MASK, self.mask_seed))
        p_sleep = self.lam / (1.0 + self.lam)
        object.__setattr__(self, "_p_sleep", p_sleep)
        object.__setattr__(self, "_p_left", p_sleep + 0.5 / (1.0 + self.lam))
        object.__setattr__(
            self,
            "_masking",
            bool(self.mask) or self.mask_fraction > 0.0 or self.mask_prefix is not None,
        )
        object.__setattr__(self, "_mask_by_site", _by_site(self.mask))
        object.__setattr__(self, "_spared_by_site", _by_site(self.spared))
        if self.mask:
            self.validate_mask()

    # ------------------------------------------------------------------
    # Raw draws
    # ------------------------------------------------------------------

    def _raw_block(self, x: int, block: int) -> np.ndarray:
        u = _block_uniforms(self._key, x, block)
        return np.where(
            u < self._p_sleep,
            SLEEP,
            np.where(u < self._p_left, JUMP_LEFT, JUMP_RIGHT),
        ).astype(np.int8)

    def raw_code(self, x: int, j: int) -> int:
        """Unmasked instruction code at (x, j), j >= 1."""
        block, offset = divmod(j - 1, BLOCK_SIZE)
        cached = self._blocks.get(x)
        if cached is None or cached[0] != block:
            cached = (block, self._raw_block(x, block).tolist())
            self._blocks[x] = cached
        return cached[1][offset]

    def _coin_block(self, x: int, block: int) -> np.ndarray:
        cache_key = (self.mask_seed, x)
        cached = self._coins.get(cache_key)
        if cached is None or cached[0] != block:
            cached = (block, _block_uniforms(self._mask_key, x, block))
            self._coins[cache_key] = cached
        return cached[1]

    def _coin(self, x: int, j: int) -> float:
        block, offset = divmod(j - 1, BLOCK_SIZE)
        return float(self._coin_block(x, block)[offset])

    @property
    def cached_blocks(self) -> int:
        """Instruction and coin blocks currently held in memory."""
        return len(self._blocks) + len(self._coins)

    # ------------------------------------------------------------------
    # Masked draws
    # ------------------------------------------------------------------

    def block_codes(self, x: int, block: int) -> np.ndarray:
        """
        Masked codes of instructions (x, block * BLOCK_SIZE + 1) onward, as int8.

        Agrees with draw_code entry by entry; the compiled kernels load
        their instructions through this.
        """
        codes = self._raw_block(x, block)
        if not self._masking:
            return codes
        sleeps = codes == SLEEP
        if not sleeps.any():
            return codes
        first = block * BLOCK_SIZE + 1
        if self.mask_fraction >= 1.0:
            nulled = np.ones(BLOCK_SIZE, dtype=bool)
        elif self.mask_fraction > 0.0:
            nulled = self._coin_block(x, block) < self.mask_fraction
        else:
            nulled = np.zeros(BLOCK_SIZE, dtype=bool)
        if self.mask_prefix is not None:
            nulled |= np.arange(first, first + BLOCK_SIZE) <= self.mask_prefix[x]
        for j in self._spared_by_site.get(x, ()):
            if first <= j < first + BLOCK_SIZE:
                nulled[j - first] = False
        for j in self._mask_by_site.get(x, ()):
            if first <= j < first + BLOCK_SIZE:
                nulled[j - first] = True
        codes[sleeps & nulled] = NULL
        return codes

    def draw_code(self, x: int, j: int) -> int:
        """Instruction code at (x, j) after masking."""
        code = self.raw_code(x, j)
        if code != SLEEP or not self._masking:
            return code
        if (x, j) in self.mask:
            return NULL
        if (x, j) in self.spared:
            return SLEEP
        if self.mask_prefix is not None and j <= self.mask_prefix[x]:
            return NULL
        if self.mask_fraction >= 1.0:
            return NULL
        if self.mask_fraction > 0.0 and self._coin(x, j) < self.mask_fraction:
            return NULL
        return SLEEP

    def draw(self, x: int, j: int) -> Instruction:
        """draw_instruction: the (x, j) instruction; NULL iff masked."""
        if j < 1:
            raise ValueError(f"Instruction indices start at 1 (got {j})")
        return Instruction(self.draw_code(x, j))

    def raw(self, x: int, j: int) -> Instruction:
        return Instruction(self.raw_code(x, j))

    # ------------------------------------------------------------------
    # Derived stacks (share the raw block cache)
    # ------------------------------------------------------------------

    def validate_mask(self) -> None:
        bad = [(x, j) for (x, j) in self.mask if j < 1 or self.raw_code(x, j) != SLEEP]
        if bad:
            raise InvalidMaskError(bad)

    def unmasked(self) -> "InstructionStack":
        return replace(
            self, mask=frozenset(), mask_fraction=0.0, mask_prefix=None, spared=frozenset()
        )

    def masked(self, fraction: float, mask_seed: int = 0) -> "InstructionStack":
        """Null each Sleep independently with probability `fraction`."""
        return replace(self, mask_fraction=fraction, mask_seed=mask_seed)

    def with_mask(self, pairs) -> "InstructionStack":
        """Null the given (x, j) Sleep draws explicitly."""
        return replace(self, mask=frozenset(self.mask) | frozenset(pairs))

    def ignoring_sleeps(self, spared=frozenset()) -> "InstructionStack":
        """Null every Sleep except the spared ones."""
        return replace(self, mask_fraction=1.0, mask_prefix=None, spared=frozenset(spared))

    def with_prefix(self, prefix: Sequence[int], spared=frozenset()) -> "InstructionStack":
        """Null every Sleep at index <= prefix[x], except the spared ones."""
        return replace(
            self,
            mask_fraction=0.0,
            mask_prefix=tuple(int(p) for p in prefix),
            spared=frozenset(spared),
        )
