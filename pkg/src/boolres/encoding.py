"""Serial NRZ encoding of input words onto the data-in wire."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .signal import BooleanWaveform

__all__ = ["BIT_PERIOD", "InputWord", "encode", "all_words"]

BIT_PERIOD = 2.5  # ns, 400 MHz


@dataclass(frozen=True)
class InputWord:
    """A bit pattern in transmission order (least-significant bit first).

    ``header`` adds a single 1 bit so that words with leading or trailing
    zeros are not mere time shifts of one another; ``header_position`` puts
    it after (default) or before the data bits on the wire.
    """

    bits: tuple
    header: bool = True
    bit_period: float = BIT_PERIOD
    header_position: str = "after"

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        if not bits:
            raise DomainError("an input word needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise DomainError("word bits must be 0 or 1")
        if not self.bit_period > 0:
            raise DomainError("bit_period must be > 0")
        if self.header_position not in ("after", "before"):
            raise DomainError("header_position must be 'after' or 'before'")

    @classmethod
    def from_int(cls, value: int, n: int, **kwargs) -> "InputWord":
        """Little-endian ``n``-bit word for ``value``."""
        if not 0 <= value < 2**n:
            raise DomainError(f"{value} does not fit in {n} bits")
        return cls(tuple((value >> k) & 1 for k in range(n)), **kwargs)

    @classmethod
    def from_string(cls, s: str, **kwargs) -> "InputWord":
        """Word from a bit string written in transmission order, e.g. ``"0100"``."""
        return cls(tuple(int(c) for c in s), **kwargs)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        return sum(b << k for k, b in enumerate(self.bits))

    @property
    def label(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def transmitted(self) -> tuple:
        if not self.header:
            return self.bits
        return self.bits + (1,) if self.header_position == "after" else (1,) + self.bits

    @property
    def duration(self) -> float:
        return len(self.transmitted) * self.bit_period


def encode(word: InputWord, horizon: float | None = None) -> BooleanWaveform:
    """NRZ waveform for ``word``; the wire is held at 0 after the last bit."""
    h = word.duration if horizon is None else float(horizon)
    toggles = []
    level = 0
    for k, bit in enumerate(word.transmitted):
        if bit != level:
            toggles.append(k * word.bit_period)
            level = bit
    if level:
        toggles.append(word.duration)
    tr = np.array(toggles, dtype=float)
    return BooleanWaveform(0, tr[tr <= h], h)


def all_words(n: int, **kwargs) -> list[InputWord]:
    """The ``2**n`` words of length ``n`` in integer order."""
    return [InputWord.from_int(v, n, **kwargs) for v in range(2**n)]
