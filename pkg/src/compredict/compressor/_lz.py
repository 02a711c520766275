"""Greedy LZ77 over a sliding window, tokens coded with adaptive models.

Parsing: at each position take the longest match (>= 3 bytes, distance <= window)
found by walking a 3-byte hash chain for at most MAX_CHAIN candidates, most
recent first; ties keep the nearest match.  Otherwise emit a literal.

Token coding (all through the range coder):

* flag literal/match, adaptive, context = type of the previous token;
* literal byte, adaptive order-0 over 256 values;
* match length: v = len - 2 in [1, 2**16]; bucket floor(log2 v) adaptive over
  17 values, then the bucket's low bits raw;
* distance: v = dist in [1, 2**30]; bucket floor(log2 v) adaptive over 31
  values, then the low bits raw.

Adaptive models start at count 1, add 32 per use and halve when the total
passes 2**16.
"""

import numpy as np
from numba import njit

from . import _rc
from ._rc import leaf

MIN_MATCH = 3
MAX_MATCH = (1 << 16) + 2
MAX_CHAIN = 64
HASH_BITS = 16
STEP = 32

# model table layout: (base offset into freq, number of symbols)
FLAG0, FLAG1, LIT, LENB, DISTB = 0, 1, 2, 3, 4
_BASE = np.array([0, 2, 4, 260, 277], np.int64)
_NSYM = np.array([2, 2, 256, 17, 31], np.int64)
_FREQ_SIZE = 308


@njit(cache=True)
def _new_models():
    freq = np.ones(_FREQ_SIZE, np.int64)
    tot = _NSYM.copy()
    return freq, tot


@leaf
def _update(freq, tot, m, sym):
    base = _BASE[m]
    freq[base + sym] += STEP
    tot[m] += STEP
    if tot[m] > _rc.MAX_TOTAL:
        t = 0
        for i in range(base, base + _NSYM[m]):
            freq[i] = (freq[i] + 1) >> 1
            t += freq[i]
        tot[m] = t


@leaf
def _put(freq, tot, m, sym, enc, out, write):
    base = _BASE[m]
    cum = 0
    for i in range(base, base + sym):
        cum += freq[i]
    _rc.encode(enc, out, write, cum, freq[base + sym], tot[m])
    _update(freq, tot, m, sym)


@leaf
def _get(freq, tot, m, dec, data):
    base = _BASE[m]
    t = _rc.decode_target(dec, tot[m])
    if t < 0:
        return -1
    cum = 0
    sym = 0
    while cum + freq[base + sym] <= t:
        cum += freq[base + sym]
        sym += 1
    if not _rc.decode_consume(dec, data, cum, freq[base + sym], tot[m]):
        return -1
    _update(freq, tot, m, sym)
    return sym


@leaf
def _bitlen(v):
    n = 0
    while v:
        v >>= 1
        n += 1
    return n


@leaf
def _hash3(data, p):
    x = (np.int64(data[p]) << 16) | (np.int64(data[p + 1]) << 8) | np.int64(data[p + 2])
    return ((x * 2654435761) & 0xFFFFFFFF) >> (32 - HASH_BITS)


@leaf
def _insert(data, n, p, head, prev):
    if p + MIN_MATCH <= n:
        h = _hash3(data, p)
        prev[p] = head[h]
        head[h] = p


@leaf
def _encode_loop(data, window, head, prev, freq, tot, enc, out, write):
    n = data.size
    p = 0
    flag_ctx = FLAG0
    while p < n:
        best_len = 0
        best_dist = 0
        if p + MIN_MATCH <= n:
            maxlen = min(MAX_MATCH, n - p)
            cand = head[_hash3(data, p)]
            steps = 0
            while cand >= 0 and steps < MAX_CHAIN:
                dist = p - cand
                if dist > window:
                    break
                if data[cand + best_len] == data[p + best_len]:
                    l = 0
                    while l < maxlen and data[cand + l] == data[p + l]:
                        l += 1
                    if l > best_len:
                        best_len = l
                        best_dist = dist
                        if l == maxlen:
                            break
                cand = prev[cand]
                steps += 1
        if best_len >= MIN_MATCH:
            _put(freq, tot, flag_ctx, 1, enc, out, write)
            v = best_len - 2
            b = _bitlen(v) - 1
            _put(freq, tot, LENB, b, enc, out, write)
            _rc.encode_bits(enc, out, write, v - (1 << b), b)
            v = best_dist
            b = _bitlen(v) - 1
            _put(freq, tot, DISTB, b, enc, out, write)
            _rc.encode_bits(enc, out, write, v - (1 << b), b)
            for q in range(p, p + best_len):
                _insert(data, n, q, head, prev)
            p += best_len
            flag_ctx = FLAG1
        else:
            _put(freq, tot, flag_ctx, 0, enc, out, write)
            _put(freq, tot, LIT, np.int64(data[p]), enc, out, write)
            _insert(data, n, p, head, prev)
            p += 1
            flag_ctx = FLAG0


@njit(cache=True)
def encode(data, window, write):
    """Returns (payload, size); ``payload`` is empty when ``write`` is False."""
    n = data.size
    head = np.full(1 << HASH_BITS, -1, np.int64)
    prev = np.empty(n, np.int64)
    freq, tot = _new_models()
    enc = _rc.new_encoder()
    # a literal costs at most 2 coder ops and a match (>= 3 bytes) at most 7,
    # each op emitting at most 2 bytes
    out = np.empty(5 * n + 16 if write else 0, np.uint8)
    _encode_loop(data, window, head, prev, freq, tot, enc, out, write)
    _rc.flush(enc, out, write)
    return out[:enc[_rc.POS]], enc[_rc.SHIFTS]


@leaf
def _decode_loop(payload, n, window, buf, freq, tot, dec):
    p = 0
    flag_ctx = FLAG0
    while p < n:
        flag = _get(freq, tot, flag_ctx, dec, payload)
        if flag < 0:
            return False
        if flag == 0:
            sym = _get(freq, tot, LIT, dec, payload)
            if sym < 0:
                return False
            buf[p] = sym
            p += 1
            flag_ctx = FLAG0
            continue
        b = _get(freq, tot, LENB, dec, payload)
        if b < 0:
            return False
        extra = _rc.decode_bits(dec, payload, b)
        if extra < 0:
            return False
        length = (1 << b) + extra + 2
        b = _get(freq, tot, DISTB, dec, payload)
        if b < 0:
            return False
        extra = _rc.decode_bits(dec, payload, b)
        if extra < 0:
            return False
        dist = (1 << b) + extra
        if dist > p or dist > window or length > n - p:
            dec[_rc.D_STATUS] = _rc.CORRUPT
            return False
        for i in range(length):
            buf[p + i] = buf[p + i - dist]
        p += length
        flag_ctx = FLAG1
    return True


@njit(cache=True)
def decode(payload, n, window):
    """Returns (data, status, offset)."""
    buf = np.zeros(n, np.uint8)
    dec = _rc.new_decoder(payload)
    if dec[_rc.D_STATUS] != _rc.OK:
        return buf, dec[_rc.D_STATUS], dec[_rc.D_POS]
    freq, tot = _new_models()
    if not _decode_loop(payload, n, window, buf, freq, tot, dec):
        return buf, dec[_rc.D_STATUS], dec[_rc.D_POS]
    if dec[_rc.D_POS] != payload.size:
        return buf, _rc.TRAILING, dec[_rc.D_POS]
    return buf, _rc.OK, dec[_rc.D_POS]
