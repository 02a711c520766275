"""Order-d PPM model (escape method C, symbol exclusion) driving the range coder.

Model layout
------------
Contexts are identified by a 64-bit rolling hash of their bytes and live in a
linear-probing table ``hkeys``/``hvals`` (value = context id, -1 = empty).
Per context: ``chead`` (first symbol entry), ``ctot`` (sum of counts) and
``cnsym`` (distinct symbols).  Symbol entries form singly linked lists
through ``esym``/``ecnt``/``enext``; new entries go to the list head.

Coding a byte ``s`` at position ``p`` (contexts are the preceding bytes):

* for orders j = min(d, p) .. 0, skip contexts never seen or whose symbols
  are all excluded; otherwise code ``s`` with probability cnt/(tot + nsym) or
  an escape with probability nsym/(tot + nsym), where ``tot`` sums only the
  non-excluded counts; on escape every symbol of the context is excluded;
* if every order escapes, code ``s`` uniformly among the 256 - |excluded|
  byte values (order -1);
* update exclusion: counts are incremented in the order that coded ``s`` and
  in every higher order (creating contexts as needed); counts are halved
  once tot + nsym would exceed 2**16.

Hash collisions can only merge statistics; the decoder sees the same
collisions, so coding stays lossless.

Undo log
--------
``extension_lengths`` codes a shared prefix once, then codes each tail with
logging enabled and rolls the model back afterwards.  The log stores
(kind, index, old value) triples for fields of contexts/entries that existed
before the mark; contexts and entries created after the mark are discarded
wholesale and their hash slots deleted.
"""

import numpy as np
from numba import njit

from . import _rc
from ._rc import leaf

SEED = np.uint64(0x243F6A8885A308D3)
MUL = np.uint64(0x9E3779B97F4A7C15)
INCREMENT = 1
# a context's counts are halved once any symbol count exceeds this
MAX_COUNT = 124

LOG_CNT, LOG_TOT, LOG_NSYM, LOG_HEAD = 0, 1, 2, 3

# meta slots
N_CTX, N_ENT, H_COUNT, LOG_LEN, CTX_MARK, ENT_MARK, LOGGING = 0, 1, 2, 3, 4, 5, 6


@leaf
def _mix(h, b):
    h = (h ^ np.uint64(b + 1)) * MUL
    return h ^ (h >> np.uint64(29))


@leaf
def _home(key, mask):
    return np.int64((key ^ (key >> np.uint64(32))) & np.uint64(mask))


@leaf
def _lookup(hkeys, hvals, key):
    mask = hkeys.size - 1
    i = _home(key, mask)
    while True:
        v = hvals[i]
        if v < 0:
            return -1
        if hkeys[i] == key:
            return v
        i = (i + 1) & mask


@leaf
def _insert(hkeys, hvals, key, value):
    mask = hkeys.size - 1
    i = _home(key, mask)
    while hvals[i] >= 0:
        i = (i + 1) & mask
    hkeys[i] = key
    hvals[i] = value


@leaf
def _delete(hkeys, hvals, key):
    """Backward-shift deletion; leaves probe chains intact."""
    mask = hkeys.size - 1
    i = _home(key, mask)
    while hkeys[i] != key or hvals[i] < 0:
        i = (i + 1) & mask
    j = i
    while True:
        j = (j + 1) & mask
        if hvals[j] < 0:
            break
        k = _home(hkeys[j], mask)
        if i <= j:
            stays = i < k <= j
        else:
            stays = k > i or k <= j
        if stays:
            continue
        hkeys[i] = hkeys[j]
        hvals[i] = hvals[j]
        i = j
    hvals[i] = -1


@njit(cache=True)
def _rehash(hkeys, hvals, size):
    nkeys = np.zeros(size, np.uint64)
    nvals = np.full(size, -1, np.int32)
    for i in range(hkeys.size):
        if hvals[i] >= 0:
            _insert(nkeys, nvals, hkeys[i], hvals[i])
    return nkeys, nvals


@leaf
def _log(logbuf, meta, kind, idx, old):
    n = meta[LOG_LEN]
    logbuf[3 * n] = kind
    logbuf[3 * n + 1] = idx
    logbuf[3 * n + 2] = old
    meta[LOG_LEN] = n + 1


@leaf
def _bump(c, s, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf):
    logging = meta[LOGGING] != 0
    old_ctx = logging and c < meta[CTX_MARK]
    e = chead[c]
    while e >= 0 and esym[e] != s:
        e = enext[e]
    if e < 0:
        e = meta[N_ENT]
        meta[N_ENT] = e + 1
        esym[e] = s
        ecnt[e] = 0
        enext[e] = chead[c]
        if old_ctx:
            _log(logbuf, meta, LOG_HEAD, c, chead[c])
            _log(logbuf, meta, LOG_NSYM, c, cnsym[c])
        chead[c] = e
        cnsym[c] += 1
    elif logging and e < meta[ENT_MARK]:
        _log(logbuf, meta, LOG_CNT, e, ecnt[e])
    if old_ctx:
        _log(logbuf, meta, LOG_TOT, c, ctot[c])
    ecnt[e] += INCREMENT
    ctot[c] += INCREMENT
    if ecnt[e] > MAX_COUNT or ctot[c] + cnsym[c] > _rc.MAX_TOTAL:
        tot = 0
        e = chead[c]
        while e >= 0:
            if logging and e < meta[ENT_MARK]:
                _log(logbuf, meta, LOG_CNT, e, ecnt[e])
            ecnt[e] = (ecnt[e] + 1) >> 1
            tot += ecnt[e]
            e = enext[e]
        ctot[c] = tot


@leaf
def _code(buf, p, order, decoding, data, dec, enc, out, write,
          hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext,
          meta, logbuf, keys, ctxs, excl, exlist):
    """Encode ``buf[p]`` or decode it into ``buf[p]``; returns False on error."""
    s = -1 if decoding else np.int64(buf[p])
    omax = min(order, p)
    h = SEED
    keys[0] = h
    for j in range(1, omax + 1):
        h = _mix(h, buf[p - j])
        keys[j] = h

    nex = 0
    found = -1
    for j in range(omax, -1, -1):
        c = _lookup(hkeys, hvals, keys[j])
        ctxs[j] = c
        if c < 0:
            continue
        tot = 0
        cum = 0
        sf = 0
        e = chead[c]
        while e >= 0:
            sy = esym[e]
            if excl[sy] == 0:
                if sy == s:
                    cum = tot
                    sf = ecnt[e]
                tot += ecnt[e]
            e = enext[e]
        if tot == 0:
            continue
        esc = cnsym[c]
        total = tot + esc
        if decoding:
            t = _rc.decode_target(dec, total)
            if t < 0:
                return False
            if t < tot:
                acc = 0
                e = chead[c]
                while e >= 0:
                    sy = esym[e]
                    if excl[sy] == 0:
                        if t < acc + ecnt[e]:
                            s = sy
                            cum = acc
                            sf = ecnt[e]
                            break
                        acc += ecnt[e]
                    e = enext[e]
            if sf > 0:
                if not _rc.decode_consume(dec, data, cum, sf, total):
                    return False
                found = j
                break
            if not _rc.decode_consume(dec, data, tot, esc, total):
                return False
        else:
            if sf > 0:
                _rc.encode(enc, out, write, cum, sf, total)
                found = j
                break
            _rc.encode(enc, out, write, tot, esc, total)
        e = chead[c]
        while e >= 0:
            sy = esym[e]
            if excl[sy] == 0:
                excl[sy] = 1
                exlist[nex] = sy
                nex += 1
            e = enext[e]

    if found < 0:
        total = 256 - nex
        if decoding:
            t = _rc.decode_target(dec, total)
            if t < 0:
                return False
            seen = -1
            for sy in range(256):
                if excl[sy] == 0:
                    seen += 1
                    if seen == t:
                        s = sy
                        break
            if not _rc.decode_consume(dec, data, t, 1, total):
                return False
        else:
            lower = 0
            for i in range(nex):
                if exlist[i] < s:
                    lower += 1
            _rc.encode(enc, out, write, s - lower, 1, total)
    for i in range(nex):
        excl[exlist[i]] = 0
    if decoding:
        buf[p] = s

    for j in range(max(found, 0), omax + 1):
        c = ctxs[j]
        if c < 0:
            c = meta[N_CTX]
            meta[N_CTX] = c + 1
            ckey[c] = keys[j]
            chead[c] = -1
            ctot[c] = 0
            cnsym[c] = 0
            _insert(hkeys, hvals, keys[j], c)
            meta[H_COUNT] += 1
        _bump(c, s, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf)
    return True


@leaf
def _rollback(hkeys, hvals, ckey, chead, ctot, cnsym, ecnt, meta, logbuf):
    for n in range(meta[LOG_LEN] - 1, -1, -1):
        kind = logbuf[3 * n]
        idx = logbuf[3 * n + 1]
        old = logbuf[3 * n + 2]
        if kind == LOG_CNT:
            ecnt[idx] = old
        elif kind == LOG_TOT:
            ctot[idx] = old
        elif kind == LOG_NSYM:
            cnsym[idx] = old
        else:
            chead[idx] = old
    for c in range(meta[N_CTX] - 1, meta[CTX_MARK] - 1, -1):
        _delete(hkeys, hvals, ckey[c])
        meta[H_COUNT] -= 1
    meta[N_CTX] = meta[CTX_MARK]
    meta[N_ENT] = meta[ENT_MARK]
    meta[LOG_LEN] = 0


# _span return codes
DONE, ERROR, GROW = 0, 1, 2


@leaf
def _span(buf, start, end, order, decoding, data, dec, enc, out, write,
          hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf,
          keys, ctxs, excl, exlist, cursor):
    """Code from ``cursor[0]`` up to ``end`` until done, failed or out of room."""
    per_symbol_log = 3 * (order + 1) * (4 + 257)
    for p in range(cursor[0], end):
        cursor[0] = p
        if 2 * (meta[H_COUNT] + order + 1) > hkeys.size:
            return GROW
        if meta[LOGGING] != 0 and 3 * meta[LOG_LEN] + per_symbol_log > logbuf.size:
            return GROW
        if write and enc[_rc.POS] + enc[_rc.CACHE_SIZE] + 2 * (order + 2) + 16 > out.size:
            return GROW
        if not _code(buf, p, order, decoding, data, dec, enc, out, write,
                     hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext,
                     meta, logbuf, keys, ctxs, excl, exlist):
            return ERROR
    cursor[0] = end
    return DONE


@njit(cache=True)
def _run(buf, start, end, order, decoding, data, dec, enc, out, write,
         hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf):
    """Code positions [start, end); grows tables as needed and returns them."""
    keys = np.zeros(order + 1, np.uint64)
    ctxs = np.zeros(order + 1, np.int64)
    excl = np.zeros(256, np.uint8)
    exlist = np.zeros(256, np.int64)
    cursor = np.array([start], np.int64)
    per_symbol_log = 3 * (order + 1) * (4 + 257)
    while True:
        status = _span(buf, start, end, order, decoding, data, dec, enc, out, write,
                       hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext,
                       meta, logbuf, keys, ctxs, excl, exlist, cursor)
        if status != GROW:
            return status == DONE, hkeys, hvals, out, logbuf
        if 2 * (meta[H_COUNT] + order + 1) > hkeys.size:
            hkeys, hvals = _rehash(hkeys, hvals, 2 * hkeys.size)
        if meta[LOGGING] != 0 and 3 * meta[LOG_LEN] + per_symbol_log > logbuf.size:
            bigger = np.empty(2 * logbuf.size + per_symbol_log, np.int64)
            bigger[:logbuf.size] = logbuf
            logbuf = bigger
        need = enc[_rc.POS] + enc[_rc.CACHE_SIZE] + 2 * (order + 2) + 16
        if write and need > out.size:
            out = _rc.grow(out, need)


@njit(cache=True)
def _new_model(nbytes, order):
    cap = nbytes * (order + 1) + 1
    hkeys = np.zeros(1 << 12, np.uint64)
    hvals = np.full(1 << 12, -1, np.int32)
    ckey = np.empty(cap, np.uint64)
    chead = np.empty(cap, np.int32)
    ctot = np.empty(cap, np.int32)
    cnsym = np.empty(cap, np.int32)
    esym = np.empty(cap, np.int32)
    ecnt = np.empty(cap, np.int32)
    enext = np.empty(cap, np.int32)
    meta = np.zeros(8, np.int64)
    return hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta


@njit(cache=True)
def encode(data, order, write):
    """Returns (payload, size); ``payload`` is empty when ``write`` is False."""
    n = data.size
    hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta = _new_model(n, order)
    enc = _rc.new_encoder()
    out = np.empty(n // 2 + 64 if write else 0, np.uint8)
    logbuf = np.empty(0, np.int64)
    dec = np.zeros(4, np.int64)
    _, hkeys, hvals, out, logbuf = _run(
        data, 0, n, order, False, data, dec, enc, out, write,
        hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf)
    if write and enc[_rc.POS] + enc[_rc.CACHE_SIZE] + 8 > out.size:
        out = _rc.grow(out, enc[_rc.POS] + enc[_rc.CACHE_SIZE] + 8)
    _rc.flush(enc, out, write)
    return out[:enc[_rc.POS]], enc[_rc.SHIFTS]


@njit(cache=True)
def decode(payload, n, order):
    """Returns (data, status, offset)."""
    buf = np.zeros(n, np.uint8)
    dec = _rc.new_decoder(payload)
    if dec[_rc.D_STATUS] != _rc.OK:
        return buf, dec[_rc.D_STATUS], dec[_rc.D_POS]
    hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta = _new_model(n, order)
    enc = _rc.new_encoder()
    out = np.empty(0, np.uint8)
    logbuf = np.empty(0, np.int64)
    ok, hkeys, hvals, out, logbuf = _run(
        buf, 0, n, order, True, payload, dec, enc, out, False,
        hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf)
    if not ok:
        return buf, dec[_rc.D_STATUS], dec[_rc.D_POS]
    if dec[_rc.D_POS] != payload.size:
        return buf, _rc.TRAILING, dec[_rc.D_POS]
    return buf, _rc.OK, dec[_rc.D_POS]


@njit(cache=True)
def extension_lengths(prefix, tails, offsets, order):
    """Coded size of prefix + tails[offsets[t]:offsets[t+1]] for every t.

    The prefix is modelled once; each tail is coded against that state and
    then rolled back.  Sizes match ``encode(prefix + tail)`` exactly.
    """
    ntails = offsets.size - 1
    longest = 0
    for t in range(ntails):
        longest = max(longest, offsets[t + 1] - offsets[t])
    P = prefix.size
    buf = np.empty(P + longest, np.uint8)
    buf[:P] = prefix
    hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta = _new_model(
        P + longest, order)
    enc = _rc.new_encoder()
    out = np.empty(0, np.uint8)
    logbuf = np.empty(1024, np.int64)
    dec = np.zeros(4, np.int64)
    _, hkeys, hvals, out, logbuf = _run(
        buf, 0, P, order, False, buf, dec, enc, out, False,
        hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf)
    saved = enc.copy()
    sizes = np.empty(ntails, np.int64)
    for t in range(ntails):
        L = offsets[t + 1] - offsets[t]
        buf[P:P + L] = tails[offsets[t]:offsets[t + 1]]
        meta[CTX_MARK] = meta[N_CTX]
        meta[ENT_MARK] = meta[N_ENT]
        meta[LOG_LEN] = 0
        meta[LOGGING] = 1
        _, hkeys, hvals, out, logbuf = _run(
            buf, P, P + L, order, False, buf, dec, enc, out, False,
            hkeys, hvals, ckey, chead, ctot, cnsym, esym, ecnt, enext, meta, logbuf)
        sizes[t] = enc[_rc.SHIFTS] + 5
        _rollback(hkeys, hvals, ckey, chead, ctot, cnsym, ecnt, meta, logbuf)
        meta[LOGGING] = 0
        enc[:] = saved
    return sizes
