"""From bits to the byte stream a compressor sees.

Run with:  python3 demos/encoding_walkthrough.py
"""
import numpy as np

from compredict.codec import (Alphabet, dump_stream, encode_history, make_candidates, peel,
                              splice)

bits = np.array([1, 0, 1, 0, 1, 0, 0], dtype=np.uint8)

# Every 4-bit window, stride 1.
words = peel(bits, 4)
print("codewords:", [format(w, "04b") for w in words])

# Fix the symbols for the three codewords that occur; the rest are arbitrary.
fixed = {0b1010: ord("A"), 0b0101: ord("D"), 0b0100: ord("G")}
spare = iter(b"BCEFHIJKLMNOPQ")
alphabet = Alphabet(4, bytes(fixed.get(c) or next(spare) for c in range(16)))

chi = encode_history(bits, k=4, r=3, alphabet=alphabet)
print("stream:   ", dump_stream(chi.data))
print("bytes:    ", len(chi.data), "=", "4 * (7 - 4) * 3 + 2")

# The trailer G = 0100 can only move to 1000 (next bit 0) or 1001 (next bit 1).
for cand in make_candidates(chi, alphabet, q=2):
    to = format(alphabet.codeword(cand.to_symbol), "04b")
    print(f"bit {cand.bit}: G -> {to}  candidate {dump_stream(cand.data)}")
    print("        spliced:", dump_stream(splice(chi, cand)))
