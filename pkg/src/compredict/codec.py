"""Transition encoding of bit histories.

A history is peeled into overlapping k-bit codewords, each codeword is mapped
to a one-byte symbol, and the symbol sequence is rewritten as pairwise
transitions ``A<ARROW>B`` separated by commas, every transition repeated
``r`` times, followed by a half-full trailer ``Z<ARROW>``::

    A»D,A»D,A»D,D»A,D»A,D»A,A»G,A»G,A»G,G»

Streams are raw byte strings.  ARROW is the single byte 0xBB (not valid UTF-8
on its own, which does not matter to a byte-oriented compressor).
"""

from dataclasses import dataclass

import numpy as np

from .errors import EncodingError, ParameterError

ARROW = 0xBB
COMMA = 0x2C
MIN_K = 2
MAX_K = 6

# printable ASCII minus the comma: 93 symbols, enough for k <= 6
SYMBOL_POOL = bytes(b for b in range(0x21, 0x7F) if b != COMMA)


@dataclass(frozen=True)
class Alphabet:
    """Injective map from k-bit codewords to symbol bytes.

    ``symbols[c]`` is the byte standing for codeword ``c``.
    """

    k: int
    symbols: bytes
    seed: int = None

    def __post_init__(self):
        if not MIN_K <= self.k <= MAX_K:
            raise ParameterError(f"k must be in [{MIN_K}, {MAX_K}], got {self.k}")
        symbols = bytes(self.symbols)
        if len(symbols) != 1 << self.k:
            raise ParameterError(f"need {1 << self.k} symbols, got {len(symbols)}")
        if len(set(symbols)) != len(symbols):
            raise ParameterError("symbol map is not injective")
        stray = set(symbols) - set(SYMBOL_POOL)
        if stray:
            raise ParameterError(f"symbols outside the pool: {sorted(stray)}")
        object.__setattr__(self, "symbols", symbols)
        inverse = np.full(256, -1, dtype=np.int64)
        inverse[np.frombuffer(symbols, dtype=np.uint8)] = np.arange(len(symbols))
        object.__setattr__(self, "_inverse", inverse)

    def codeword(self, symbol):
        c = int(self._inverse[symbol])
        if c < 0:
            raise EncodingError(f"byte 0x{symbol:02x} is not in the alphabet")
        return c

    def map(self, codewords):
        """Symbol bytes for an array of codewords."""
        table = np.frombuffer(self.symbols, dtype=np.uint8)
        return table[np.asarray(codewords)].tobytes()


def build_alphabet(k, seed):
    """Shuffle the symbol pool with ``seed`` and take the first 2**k bytes."""
    if not MIN_K <= k <= MAX_K:
        raise ParameterError(f"k must be in [{MIN_K}, {MAX_K}], got {k}")
    perm = np.random.default_rng(seed).permutation(len(SYMBOL_POOL))
    pool = np.frombuffer(SYMBOL_POOL, dtype=np.uint8)
    return Alphabet(k, pool[perm[:1 << k]].tobytes(), seed)


def peel(bits, k):
    """All k-bit codewords of ``bits`` read with a stride-1 window."""
    bits = np.asarray(bits, dtype=np.int64)
    if k < 1 or bits.size < k:
        raise ParameterError(f"cannot peel {k}-bit words from {bits.size} bits")
    weights = 1 << np.arange(k - 1, -1, -1)
    return np.lib.stride_tricks.sliding_window_view(bits, k) @ weights


@dataclass(frozen=True)
class TransitionStream:
    data: bytes
    trailer_symbol: int
    r: int
    k: int = None

    @property
    def n_units(self):
        return (len(self.data) - 2) // 4


@dataclass(frozen=True)
class Candidate:
    bit: int
    data: bytes
    to_symbol: int


def transition_encode(symbols, r, k=None):
    """Rewrite a symbol sequence as r-fold repeated transitions plus trailer."""
    sym = np.frombuffer(bytes(symbols), dtype=np.uint8)
    if sym.size == 0:
        raise ParameterError("cannot encode an empty symbol sequence")
    if r < 1:
        raise ParameterError(f"repeat factor must be >= 1, got {r}")
    units = np.empty((sym.size - 1, 4), dtype=np.uint8)
    units[:, 0] = sym[:-1]
    units[:, 1] = ARROW
    units[:, 2] = sym[1:]
    units[:, 3] = COMMA
    body = np.repeat(units, r, axis=0).tobytes()
    last = int(sym[-1])
    return TransitionStream(body + bytes((last, ARROW)), last, r, k)


def encode_history(bits, k, r, alphabet):
    """peel -> symbol map -> transition_encode."""
    if len(bits) < k + 1:
        raise ParameterError(f"history of {len(bits)} bits has no {k}-bit transition")
    return transition_encode(alphabet.map(peel(bits, k)), r, k)


def check_stream(stream):
    """Raise EncodingError unless ``stream.data`` matches the grammar."""
    data = stream.data
    if len(data) < 2 or len(data) % 4 != 2:
        raise EncodingError(f"stream length {len(data)} is not 4*units + 2")
    if data[-1] != ARROW or data[-2] != stream.trailer_symbol:
        raise EncodingError("stream does not end with its trailer")
    body = np.frombuffer(data, dtype=np.uint8, count=len(data) - 2).reshape(-1, 4)
    if body.size and not ((body[:, 1] == ARROW).all() and (body[:, 3] == COMMA).all()):
        raise EncodingError("stream units are not of the form sym ARROW sym COMMA")


def make_candidates(stream, alphabet, q):
    """The two continuations of the trailer state, each repeated q*r times.

    Candidate ``b`` goes from the trailer's codeword ``c`` to the codeword
    obtained by dropping the first bit of ``c`` and appending ``b``.
    """
    if q < 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    c = alphabet.codeword(stream.trailer_symbol)
    mask = (1 << alphabet.k) - 1
    out = []
    for b in (0, 1):
        to = alphabet.symbols[((c << 1) | b) & mask]
        unit = bytes((stream.trailer_symbol, ARROW, to))
        out.append(Candidate(b, b",".join([unit] * (q * stream.r)), to))
    return tuple(out)


def splice(stream, candidate):
    """Replace the trailer of ``stream`` by the candidate block."""
    check_stream(stream)
    if not candidate.data or candidate.data[0] != stream.trailer_symbol:
        raise EncodingError("candidate does not start at the stream's trailer state")
    return stream.data[:-2] + candidate.data


def parse_stream(stream):
    """Recover the symbol sequence a stream was built from."""
    check_stream(stream)
    body = np.frombuffer(stream.data, dtype=np.uint8, count=len(stream.data) - 2)
    firsts = body.reshape(-1, 4)[::stream.r, 0] if body.size else body
    return firsts.tobytes() + bytes((stream.trailer_symbol,))


def dump_stream(data):
    """Human-readable rendering: symbols as ASCII, ARROW as '=>'."""
    return "".join("=>" if b == ARROW else chr(b) for b in data)
