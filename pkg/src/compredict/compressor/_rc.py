"""Range coder with 32-bit registers and carry propagation.

Encoder state is an int64 array ``enc``:

    enc[LOW]         low end of the interval, up to 33 bits (bit 32 = carry)
    enc[RANGE]       interval width, kept in [2**24, 2**32)
    enc[CACHE]       last byte shifted out of ``low`` and not yet written
    enc[CACHE_SIZE]  1 + number of pending 0xFF bytes behind ``cache``
    enc[SHIFTS]      number of shift_low calls so far
    enc[POS]         bytes written to ``out``

Renormalisation: after each symbol, while RANGE < 2**24, shift RANGE and LOW
left by one byte.  Every shift eventually emits exactly one byte and the flush
performs five more shifts, so the coded size equals ``enc[SHIFTS]`` after the
flush.  That lets callers count bytes without writing them (``write=False``).
The first byte of every stream is 0.

Totals passed to ``encode`` must not exceed 2**16.
"""

import numpy as np
from numba import njit

TOP = 1 << 24
MAX_TOTAL = 1 << 16
MASK32 = 0xFFFFFFFF

LOW, RANGE, CACHE, CACHE_SIZE, SHIFTS, POS = 0, 1, 2, 3, 4, 5

# decoder state slots
D_RANGE, D_CODE, D_POS, D_STATUS = 0, 1, 2, 3

# decoder status codes
OK, TRUNCATED, CORRUPT, TRAILING, BAD_HEADER = 0, 1, 2, 3, 4

# Helpers called per symbol take many array arguments; with the runtime's
# reference counting on, each call pays an atomic incref/decref per array.
# These helpers never allocate, so they are compiled without it.
leaf = njit(cache=True, _nrt=False)


@njit(cache=True)
def new_encoder():
    enc = np.zeros(6, np.int64)
    enc[RANGE] = MASK32
    enc[CACHE_SIZE] = 1
    return enc


@leaf
def shift_low(enc, out, write):
    low = enc[LOW]
    if low < 0xFF000000 or low > MASK32:
        if write:
            carry = low >> 32
            temp = enc[CACHE]
            pos = enc[POS]
            for _ in range(enc[CACHE_SIZE]):
                out[pos] = (temp + carry) & 0xFF
                pos += 1
                temp = 0xFF
            enc[POS] = pos
        enc[CACHE_SIZE] = 0
        enc[CACHE] = (low >> 24) & 0xFF
    enc[CACHE_SIZE] += 1
    enc[LOW] = (low & 0x00FFFFFF) << 8
    enc[SHIFTS] += 1


@leaf
def encode(enc, out, write, cum, freq, total):
    r = enc[RANGE] // total
    enc[LOW] += r * cum
    enc[RANGE] = r * freq
    while enc[RANGE] < TOP:
        enc[RANGE] <<= 8
        shift_low(enc, out, write)


@leaf
def encode_bits(enc, out, write, value, nbits):
    """Code ``nbits`` raw bits of ``value``, most significant first."""
    while nbits > 0:
        c = min(nbits, 16)
        part = (value >> (nbits - c)) & ((1 << c) - 1)
        encode(enc, out, write, part, 1, 1 << c)
        nbits -= c


@leaf
def flush(enc, out, write):
    for _ in range(5):
        shift_low(enc, out, write)


@njit(cache=True)
def grow(out, need):
    size = max(2 * out.size, need, 64)
    bigger = np.empty(size, np.uint8)
    bigger[:out.size] = out
    return bigger


@njit(cache=True)
def new_decoder(data):
    dec = np.zeros(4, np.int64)
    dec[D_RANGE] = MASK32
    if data.size < 5:
        dec[D_STATUS] = TRUNCATED
        dec[D_POS] = data.size
        return dec
    if data[0] != 0:
        dec[D_STATUS] = BAD_HEADER
        return dec
    code = 0
    for i in range(1, 5):
        code = (code << 8) | data[i]
    dec[D_CODE] = code
    dec[D_POS] = 5
    return dec


@leaf
def decode_target(dec, total):
    """Cumulative frequency the next symbol falls in, or -1 on corruption."""
    r = dec[D_RANGE] // total
    v = dec[D_CODE] // r
    if v >= total:
        dec[D_STATUS] = CORRUPT
        return -1
    return v


@leaf
def decode_consume(dec, data, cum, freq, total):
    r = dec[D_RANGE] // total
    dec[D_CODE] -= r * cum
    dec[D_RANGE] = r * freq
    while dec[D_RANGE] < TOP:
        pos = dec[D_POS]
        if pos >= data.size:
            dec[D_STATUS] = TRUNCATED
            return False
        dec[D_CODE] = ((dec[D_CODE] << 8) | data[pos]) & MASK32
        dec[D_POS] = pos + 1
        dec[D_RANGE] <<= 8
    return True


@leaf
def decode_bits(dec, data, nbits):
    value = 0
    while nbits > 0:
        c = min(nbits, 16)
        t = decode_target(dec, 1 << c)
        if t < 0 or not decode_consume(dec, data, t, 1, 1 << c):
            return -1
        value = (value << c) | t
        nbits -= c
    return value
