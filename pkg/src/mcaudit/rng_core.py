"""Seed-controlled pseudo-random generators with exact 32-bit semantics.

Three generators with very different quality levels, which is the point:
the audit battery needs both a good generator and known-bad ones.

* ``MT19937``: the 624-word twisted generalized feedback shift register.
  Full 32-bit output, period 2**19937 - 1.
* ``RANDU``: the infamous IBM multiplicative congruential generator,
  x -> 65539*x mod 2**31 on odd seeds.  Period 2**29, catastrophic
  3-dimensional lattice structure.
* ``LCG_MINSTD``: the Lehmer minimal standard, x -> 16807*x mod (2**31 - 1).

All state arithmetic is exact unsigned-integer arithmetic.  A given
(kind, seed) pair produces a bit-identical stream on every platform, via
the scalar methods and the vectorized block methods alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidSeed

_MASK32 = 0xFFFFFFFF

# MT19937 parameters, fixed by the algorithm definition.
_MT_N = 624
_MT_M = 397
_MT_MATRIX_A = 0x9908B0DF
_MT_UPPER = 0x80000000  # most significant w-r bits
_MT_LOWER = 0x7FFFFFFF  # least significant r bits
_MT_SEED_MULT = 1812433253

_RANDU_MULT = 65539
_RANDU_MOD = 1 << 31
_MINSTD_MULT = 16807
_MINSTD_MOD = (1 << 31) - 1  # Mersenne prime


class GeneratorKind(Enum):
    """Identifies one of the supported generator algorithms."""

    MT19937 = "mt19937"
    RANDU = "randu"
    LCG_MINSTD = "minstd"

    @property
    def output_bits(self) -> int:
        """Width of the raw output word.

        The congruential generators emit 31-bit residues which
        ``next_u32`` zero-extends; real conversions must divide by the
        native width or half the unit interval goes unused.
        """
        return 32 if self is GeneratorKind.MT19937 else 31


class RealConversion(Enum):
    """Rule mapping a raw output word to a real number.

    The first three divide by constants tied to the full 32-bit width.
    ``HALF_OPEN_31`` divides by 2**31 and is the default for the
    congruential kinds, whose residues never reach 2**31; feeding those
    through a 32-bit rule would compress them into [0, 0.5).
    """

    CLOSED_CLOSED = "closed-closed"  # u / (2**32 - 1), lands in [0, 1]
    HALF_OPEN = "half-open"          # u / 2**32, lands in [0, 1)
    OPEN_OPEN = "open-open"          # (u + 0.5) / 2**32, lands in (0, 1)
    HALF_OPEN_31 = "half-open-31"    # u / 2**31, lands in [0, 1) for 31-bit words

    def apply(self, u):
        """Convert a raw word (int or uint32 ndarray) to float64."""
        if self is RealConversion.CLOSED_CLOSED:
            return u / 4294967295.0
        if self is RealConversion.HALF_OPEN:
            return u / 4294967296.0
        if self is RealConversion.OPEN_OPEN:
            return (u + 0.5) / 4294967296.0
        return u / 2147483648.0


def default_conversion(kind: GeneratorKind) -> RealConversion:
    """Conversion used when the caller does not pick one.

    Half-open [0, 1) at the generator's native output width.
    """
    if kind.output_bits == 32:
        return RealConversion.HALF_OPEN
    return RealConversion.HALF_OPEN_31


@dataclass(frozen=True)
class PeriodDescriptor:
    """Cycle length of a generator, exact when it fits comfortably in an int.

    ``exact`` is None for MT19937: 2**19937 - 1 is representable but
    useless as an int, and downstream budget math works in log2 space.
    ``log2_period`` is always present and must agree with ``exact``.
    """

    exact: Optional[int]
    log2_period: float

    def __post_init__(self) -> None:
        if self.log2_period <= 0.0:
            raise DomainError("log2_period must be positive")
        if self.exact is not None:
            if self.exact <= 0:
                raise DomainError("exact period must be positive")
            expected = math.log2(self.exact)
            if abs(self.log2_period - expected) > 1e-9 * expected:
                raise DomainError(
                    f"log2_period {self.log2_period} does not match exact "
                    f"period {self.exact}"
                )


_PERIODS = {
    GeneratorKind.MT19937: PeriodDescriptor(None, 19937.0),
    GeneratorKind.RANDU: PeriodDescriptor(1 << 29, 29.0),
    GeneratorKind.LCG_MINSTD: PeriodDescriptor(_MINSTD_MOD - 1,
                                               math.log2(_MINSTD_MOD - 1)),
}


def period_of(kind: GeneratorKind) -> PeriodDescriptor:
    """Period of the generator algorithm (independent of seed).

    RANDU's period is 2**29: the multiplier 65539 is congruent to
    3 mod 8, so the multiplicative order mod 2**31 on odd residues is
    2**(31-2).  MINSTD's modulus is prime and 16807 is a primitive
    root, so every nonzero seed sits on one cycle of length 2**31 - 2.
    """
    return _PERIODS[kind]


def _mt_seed_state(seed: int) -> np.ndarray:
    # Knuth-style initializer: each word mixes the shifted previous word.
    mt = [0] * _MT_N
    mt[0] = seed & _MASK32
    for i in range(1, _MT_N):
        prev = mt[i - 1]
        mt[i] = (_MT_SEED_MULT * (prev ^ (prev >> 30)) + i) & _MASK32
    return np.array(mt, dtype=np.uint32)


def _mt_twist(mt: np.ndarray) -> None:
    """Regenerate all 624 state words in place.

    The reference loop updates the array sequentially, and three reads
    cross already-written slots: indices below N-M read words the same
    pass rewrote, and the final word reads the brand-new word 0.  The
    phase split below reproduces that order exactly with array ops.
    """
    n, m = _MT_N, _MT_M
    nm = n - m  # 227
    upper = np.uint32(_MT_UPPER)
    lower = np.uint32(_MT_LOWER)
    matrix_a = np.uint32(_MT_MATRIX_A)
    old = mt.copy()

    y = (old[: n - 1] & upper) | (old[1:] & lower)
    t = (y >> np.uint32(1)) ^ np.where((y & np.uint32(1)).astype(bool),
                                       matrix_a, np.uint32(0))
    # Words 0..N-M-1 read only old state.
    mt[:nm] = old[m:] ^ t[:nm]
    # Words N-M..N-2 read new words at offset M-N; the dependence has
    # stride N-M, so two chunks suffice.
    mt[nm:2 * nm] = mt[:nm] ^ t[nm:2 * nm]
    mt[2 * nm:n - 1] = mt[nm:n - 1 - nm] ^ t[2 * nm:n - 1]
    # Final word pairs the old last word with the freshly written word 0.
    y_last = (int(old[n - 1]) & _MT_UPPER) | (int(mt[0]) & _MT_LOWER)
    t_last = (y_last >> 1) ^ (_MT_MATRIX_A if y_last & 1 else 0)
    mt[n - 1] = np.uint32(int(mt[m - 1]) ^ t_last)


def _mt_temper_block(words: np.ndarray) -> np.ndarray:
    y = words.copy()
    y ^= y >> np.uint32(11)
    y ^= (y << np.uint32(7)) & np.uint32(0x9D2C5680)
    y ^= (y << np.uint32(15)) & np.uint32(0xEFC60000)
    y ^= y >> np.uint32(18)
    return y


class GeneratorState:
    """Mutable generator state: kind, seed, draw counter, internal words.

    Single-owner semantics: every ``next_*``, ``*_block`` and ``skip``
    call advances the state.  Two states built from the same
    (kind, seed) always produce the same stream; ``draws`` counts raw
    words consumed since construction.
    """

    __slots__ = ("kind", "seed", "draws", "_mt", "_mti", "_word")

    def __init__(self, kind: GeneratorKind, seed: int) -> None:
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise InvalidSeed(f"seed must be an int, got {type(seed).__name__}")
        if not 0 <= seed <= _MASK32:
            raise InvalidSeed(f"seed {seed} outside 32-bit unsigned range")
        if kind is GeneratorKind.RANDU:
            # the even residues collapse onto shorter cycles, and anything
            # >= 2**31 is not a residue at all
            if seed % 2 == 0 or seed >= _RANDU_MOD:
                raise InvalidSeed(
                    f"RANDU seed must be odd and below 2**31, got {seed}")
        elif kind is GeneratorKind.LCG_MINSTD:
            if not 1 <= seed <= _MINSTD_MOD - 1:
                raise InvalidSeed(
                    f"MINSTD seed must lie in [1, 2**31 - 2], got {seed}")
        self.kind = kind
        self.seed = seed
        self.draws = 0
        if kind is GeneratorKind.MT19937:
            self._mt = _mt_seed_state(seed)
            self._mti = _MT_N  # forces a twist before the first output
            self._word = 0
        else:
            self._mt = None
            self._mti = 0
            self._word = seed

    def __repr__(self) -> str:
        return (f"GeneratorState(kind={self.kind.value!r}, seed={self.seed}, "
                f"draws={self.draws})")

    # -- scalar path ---------------------------------------------------

    def next_u32(self) -> int:
        """Next raw output word as a Python int in [0, 2**32)."""
        if self.kind is GeneratorKind.MT19937:
            if self._mti >= _MT_N:
                _mt_twist(self._mt)
                self._mti = 0
            y = int(self._mt[self._mti])
            self._mti += 1
            y ^= y >> 11
            y ^= (y << 7) & 0x9D2C5680
            y ^= (y << 15) & 0xEFC60000
            y ^= y >> 18
        elif self.kind is GeneratorKind.RANDU:
            y = (_RANDU_MULT * self._word) % _RANDU_MOD
            self._word = y
        else:
            y = (_MINSTD_MULT * self._word) % _MINSTD_MOD
            self._word = y
        self.draws += 1
        return y

    def next_real(self, conversion: Optional[RealConversion] = None) -> float:
        """Next output mapped into the unit interval.

        Defaults to the half-open conversion at the generator's native
        output width.
        """
        if conversion is None:
            conversion = default_conversion(self.kind)
        return conversion.apply(self.next_u32())

    def skip(self, n: int) -> "GeneratorState":
        """Advance the stream by n draws without materializing outputs.

        Afterwards the state is exactly what n ``next_u32`` calls would
        have left behind.  Cost is linear in n, but for MT19937 the walk
        happens a 624-word twist at a time with no tempering, so burning
        the conventional warm-up prefix of 10**6 draws takes a few
        hundredths of a second.

        Returns self so call sites can chain construction and skip.
        """
        if n < 0:
            raise DomainError(f"skip count must be nonnegative, got {n}")
        if self.kind is GeneratorKind.MT19937:
            remaining = n
            while remaining > 0:
                if self._mti >= _MT_N:
                    _mt_twist(self._mt)
                    self._mti = 0
                step = min(_MT_N - self._mti, remaining)
                self._mti += step
                remaining -= step
        elif self.kind is GeneratorKind.RANDU:
            w = self._word
            for _ in range(n):
                w = (_RANDU_MULT * w) % _RANDU_MOD
            self._word = w
        else:
            w = self._word
            for _ in range(n):
                w = (_MINSTD_MULT * w) % _MINSTD_MOD
            self._word = w
        self.draws += n
        return self

    # -- block path ----------------------------------------------------

    def u32_block(self, count: int) -> np.ndarray:
        """Next ``count`` raw words as a uint32 array.

        Bit-identical to ``count`` scalar ``next_u32`` calls, just
        produced in bulk.
        """
        if count < 0:
            raise DomainError(f"block count must be nonnegative, got {count}")
        out = np.empty(count, dtype=np.uint32)
        if self.kind is GeneratorKind.MT19937:
            filled = 0
            while filled < count:
                if self._mti >= _MT_N:
                    _mt_twist(self._mt)
                    self._mti = 0
                take = min(_MT_N - self._mti, count - filled)
                out[filled:filled + take] = _mt_temper_block(
                    self._mt[self._mti:self._mti + take])
                self._mti += take
                filled += take
        else:
            mult = _RANDU_MULT if self.kind is GeneratorKind.RANDU else _MINSTD_MULT
            mod = _RANDU_MOD if self.kind is GeneratorKind.RANDU else _MINSTD_MOD
            w = self._word
            vals = out  # fill through a Python loop; modulus math stays exact
            for i in range(count):
                w = (mult * w) % mod
                vals[i] = w
            self._word = w
        self.draws += count
        return out

    def real_block(self, count: int,
                   conversion: Optional[RealConversion] = None) -> np.ndarray:
        """Next ``count`` outputs converted to float64."""
        if conversion is None:
            conversion = default_conversion(self.kind)
        return conversion.apply(self.u32_block(count))

    # -- introspection ---------------------------------------------------

    def state_vector(self) -> Sequence[int]:
        """Snapshot of the internal state words (for tests and debugging)."""
        if self.kind is GeneratorKind.MT19937:
            return tuple(int(v) for v in self._mt) + (self._mti,)
        return (self._word,)


def new_generator(kind: GeneratorKind, seed: int) -> GeneratorState:
    """Build a fresh generator.  Raises InvalidSeed on a bad (kind, seed)."""
    return GeneratorState(kind, seed)
