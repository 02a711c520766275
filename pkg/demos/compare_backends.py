"""Compressed length of one transition stream under PPM orders and LZ windows.

Run with:  python3 demos/compare_backends.py
"""
from compredict import source
from compredict.codec import build_alphabet, encode_history
from compredict.compressor import LZCompressor, PPMCompressor

x = source.generate(source.random_source(4, 0.3, seed=1), 2000, seed=1)
chi = encode_history(x, k=4, r=20, alphabet=build_alphabet(4, seed=1))
print(f"stream: {len(chi.data)} bytes")

for d in range(1, 9):
    print(f"  ppm d={d}:      {PPMCompressor(d).compressed_length(chi.data):6d}")
for logd in range(10, 21, 2):
    print(f"  lz  D=2^{logd}:  {LZCompressor(1 << logd).compressed_length(chi.data):6d}")

# Round trip, for good measure.
z = PPMCompressor(6).compress(chi.data)
assert PPMCompressor(6).decompress(z) == chi.data
