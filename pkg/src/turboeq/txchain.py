"""Transmitter chain: convolutional encoding, interleaving, symbol mapping."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Termination(enum.Enum):
    TAIL_TERMINATED = "tail"
    UNTERMINATED = "none"


@dataclass(frozen=True)
class ConvCodeSpec:
    """Feedforward binary convolutional code.

    Generators are octal-specified polynomials (e.g. 0o23, 0o35); the most
    significant generator bit taps the current input bit, the least
    significant taps the oldest bit in the register.
    """

    generators: tuple[int, ...]
    constraint_length: int
    termination: Termination = Termination.TAIL_TERMINATED

    def __post_init__(self):
        if self.constraint_length < 1:
            raise ValueError("constraint_length must be >= 1")
        if not self.generators:
            raise ValueError("need at least one generator")
        for g in self.generators:
            if not 0 < g < (1 << self.constraint_length):
                raise ValueError(f"generator {g:o} does not fit constraint length")

    @property
    def rate(self) -> float:
        return 1.0 / len(self.generators)

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    @property
    def tail_bits(self) -> int:
        if self.termination is Termination.TAIL_TERMINATED:
            return self.constraint_length - 1
        return 0

    def taps(self) -> np.ndarray:
        """(n_generators, constraint_length) 0/1 tap array, tap j on input delayed j."""
        K = self.constraint_length
        out = np.zeros((len(self.generators), K), dtype=np.int64)
        for gi, g in enumerate(self.generators):
            for j in range(K):
                out[gi, j] = (g >> (K - 1 - j)) & 1
        return out


@dataclass(frozen=True)
class InterleaverSpec:
    """Bit permutation; interleave(c)[j] = c[permutation[j]]."""

    permutation: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if np.any(np.sort(perm) != np.arange(perm.size)):
            raise ValueError("permutation is not a bijection on its index range")
        object.__setattr__(self, "permutation", perm)

    @property
    def size(self) -> int:
        return self.permutation.size


def random_interleaver(n: int, seed: int) -> InterleaverSpec:
    """Seeded pseudo-random permutation (numpy PCG64 Fisher-Yates)."""
    perm = np.random.default_rng(seed).permutation(n)
    return InterleaverSpec(perm, seed=seed)


def identity_interleaver(n: int) -> InterleaverSpec:
    return InterleaverSpec(np.arange(n), seed=None)


def interleave(c: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    if c.shape[0] != spec.size:
        raise ValueError(f"length {c.shape[0]} does not match interleaver size {spec.size}")
    return c[spec.permutation]


def deinterleave(d: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    if d.shape[0] != spec.size:
        raise ValueError(f"length {d.shape[0]} does not match interleaver size {spec.size}")
    out = np.empty_like(d)
    out[spec.permutation] = d
    return out


@dataclass(frozen=True)
class ModulationMap:
    """Bit-pattern to symbol labeling over an ordered alphabet.

    ``pattern_to_index[p]`` is the alphabet index of the symbol labeled by
    bit pattern p, where pattern bits are read most significant first
    (first bit of the group is the MSB).
    """

    bits_per_symbol: int
    alphabet: np.ndarray
    pattern_to_index: np.ndarray

    def __post_init__(self):
        alphabet = np.asarray(self.alphabet, dtype=float)
        table = np.asarray(self.pattern_to_index, dtype=np.int64)
        if alphabet.size != 1 << self.bits_per_symbol:
            raise ValueError("alphabet size must be 2**bits_per_symbol")
        if np.any(np.diff(alphabet) <= 0):
            raise ValueError("alphabet must be strictly increasing")
        if np.any(np.sort(table) != np.arange(alphabet.size)):
            raise ValueError("labeling must be a bijection")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "pattern_to_index", table)

    @property
    def index_to_pattern(self) -> np.ndarray:
        inv = np.empty_like(self.pattern_to_index)
        inv[self.pattern_to_index] = np.arange(self.pattern_to_index.size)
        return inv

    def label_bits(self) -> np.ndarray:
        """(alphabet_size, bits_per_symbol) bit labels per alphabet index."""
        pat = self.index_to_pattern
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return (pat[:, None] >> shifts[None, :]) & 1


def bpsk_map() -> ModulationMap:
    """BPSK labeling 0 -> -1, 1 -> +1."""
    return ModulationMap(1, np.array([-1.0, 1.0]), np.array([0, 1]))


def pam4_gray_map() -> ModulationMap:
    """4-PAM with Gray labeling 00,01,11,10 -> -3,-1,+1,+3."""
    return ModulationMap(2, np.array([-3.0, -1.0, 1.0, 3.0]), np.array([0, 1, 3, 2]))


def encode(bits: np.ndarray, code: ConvCodeSpec) -> np.ndarray:
    """Encode an information bit vector; generator outputs are interleaved per step.

    Under tail termination, constraint_length - 1 zero bits are appended so
    the encoder ends in the all-zero state.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size < 1:
        raise ValueError("bits must be a nonempty 1-d vector")
    u = np.concatenate([bits, np.zeros(code.tail_bits, dtype=np.int64)])
    taps = code.taps()
    steps = u.size
    out = np.zeros((steps, len(code.generators)), dtype=np.int64)
    for gi in range(len(code.generators)):
        acc = np.zeros(steps, dtype=np.int64)
        for j in range(code.constraint_length):
            if taps[gi, j]:
                acc[j:] ^= u[: steps - j]
        out[:, gi] = acc
    return out.reshape(-1)


def map_symbols(
    coded_bits: np.ndarray,
    modmap: ModulationMap,
    pi: InterleaverSpec,
) -> np.ndarray:
    """Interleave coded bits and map groups of B bits onto alphabet symbols."""
    c = np.asarray(coded_bits, dtype=np.int64)
    d = interleave(c, pi)
    B = modmap.bits_per_symbol
    if d.size % B:
        raise ValueError(f"interleaved length {d.size} not divisible by {B} bits/symbol")
    groups = d.reshape(-1, B)
    shifts = np.arange(B - 1, -1, -1)
    patterns = (groups << shifts[None, :]).sum(axis=1)
    return modmap.alphabet[modmap.pattern_to_index[patterns]]


def hard_demap(symbols: np.ndarray, modmap: ModulationMap, pi: InterleaverSpec) -> np.ndarray:
    """Exact inverse of map_symbols for noise-free symbol vectors."""
    idx = np.searchsorted(modmap.alphabet, symbols)
    patterns = modmap.index_to_pattern[idx]
    B = modmap.bits_per_symbol
    shifts = np.arange(B - 1, -1, -1)
    bits = ((patterns[:, None] >> shifts[None, :]) & 1).reshape(-1)
    return deinterleave(bits, pi)
