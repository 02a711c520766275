"""Compressed length as a black box.

Three backends share one contract: ``compress``/``decompress`` plus
``compressed_length`` (the length in bytes of ``compress``'s output).

Stream format for the built-in backends: a 4-byte little-endian length of
the plaintext followed by the range-coder payload.  The header is counted
in the compressed length.
"""

import shlex
import struct
import subprocess
from dataclasses import dataclass

import numpy as np

from ..errors import BackendError, DecodeError, ParameterError
from . import _lz, _ppm, _rc

HEADER = struct.Struct("<I")

_STATUS_TEXT = {
    _rc.TRUNCATED: "truncated stream",
    _rc.CORRUPT: "corrupt stream",
    _rc.TRAILING: "trailing bytes after stream",
    _rc.BAD_HEADER: "bad coder header",
}


@dataclass(frozen=True)
class CompressorSpec:
    """Which backend to use and its single parameter.

    kind is "ppm" (``ppm_order`` = maximum context length d), "lz"
    (``dict_size`` = window D in bytes, a power of two) or "external"
    (``command`` reads raw bytes on stdin and writes compressed bytes).
    """

    kind: str = "ppm"
    ppm_order: int = 6
    dict_size: int = 1 << 16
    command: str = None

    def __post_init__(self):
        if self.kind == "ppm":
            if not 1 <= self.ppm_order <= 32:
                raise ParameterError(f"ppm_order must be in [1, 32], got {self.ppm_order}")
        elif self.kind == "lz":
            d = self.dict_size
            if not (1 << 10) <= d <= (1 << 30) or d & (d - 1):
                raise ParameterError(
                    f"dict_size must be a power of two in [2**10, 2**30], got {d}")
        elif self.kind == "external":
            if not self.command:
                raise ParameterError("external backend needs a command")
        else:
            raise ParameterError(f"unknown compressor kind {self.kind!r}")

    def label(self):
        if self.kind == "ppm":
            return f"ppm(d={self.ppm_order})"
        if self.kind == "lz":
            return f"lz(D=2^{self.dict_size.bit_length() - 1})"
        return f"external({self.command})"


def _as_array(data):
    # the kernels take writable uint8 arrays
    return np.frombuffer(bytearray(data), dtype=np.uint8)


class Compressor:
    """Base class.  Subclasses implement ``compressed_length`` at least."""

    def compress(self, data):
        raise NotImplementedError

    def decompress(self, data):
        raise NotImplementedError

    def compressed_length(self, data):
        return len(self.compress(data))

    def extension_lengths(self, prefix, tails):
        """``[compressed_length(prefix + t) for t in tails]``."""
        return [self.compressed_length(prefix + t) for t in tails]


class _Builtin(Compressor):

    def _encode(self, arr, write):
        raise NotImplementedError

    def _decode(self, payload, n):
        raise NotImplementedError

    def compress(self, data):
        data = bytes(data)
        payload, _ = self._encode(_as_array(data), True)
        return HEADER.pack(len(data)) + payload.tobytes()

    def compressed_length(self, data):
        _, size = self._encode(_as_array(data), False)
        return HEADER.size + int(size)

    def decompress(self, data):
        data = bytes(data)
        if len(data) < HEADER.size:
            raise DecodeError("missing length header", len(data))
        (n,) = HEADER.unpack_from(data)
        out, status, offset = self._decode(_as_array(data[HEADER.size:]), n)
        if status != _rc.OK:
            raise DecodeError(_STATUS_TEXT[int(status)], HEADER.size + int(offset))
        return out.tobytes()


class PPMCompressor(_Builtin):
    """Order-d PPM with method-C escapes and an arithmetic coder."""

    def __init__(self, order=6):
        self.order = order

    def _encode(self, arr, write):
        return _ppm.encode(arr, self.order, write)

    def _decode(self, payload, n):
        return _ppm.decode(payload, n, self.order)

    def extension_lengths(self, prefix, tails):
        # model the shared prefix once, then each tail against a rolled-back copy
        tails = [bytes(t) for t in tails]
        offsets = np.cumsum([0] + [len(t) for t in tails], dtype=np.int64)
        sizes = _ppm.extension_lengths(
            _as_array(prefix), _as_array(b"".join(tails)), offsets, self.order)
        return [HEADER.size + int(s) for s in sizes]


class LZCompressor(_Builtin):
    """Greedy LZ77 over a ``dict_size``-byte window."""

    def __init__(self, dict_size=1 << 16):
        self.dict_size = dict_size

    def _encode(self, arr, write):
        return _lz.encode(arr, self.dict_size, write)

    def _decode(self, payload, n):
        return _lz.decode(payload, n, self.dict_size)


class ExternalCompressor(Compressor):
    """Pipes data through a shell-style command and measures its stdout."""

    def __init__(self, command):
        self.command = command
        self.argv = shlex.split(command)

    def compress(self, data):
        try:
            proc = subprocess.run(self.argv, input=bytes(data), capture_output=True)
        except OSError as exc:
            raise BackendError(f"cannot run {self.command!r}: {exc}") from exc
        if proc.returncode != 0:
            raise BackendError(
                f"{self.command!r} exited with status {proc.returncode}", proc.stderr)
        return proc.stdout

    def decompress(self, data):
        raise BackendError("the external backend has no decoder")


def make_compressor(spec):
    """Backend instance for ``spec``; backend instances pass through."""
    if isinstance(spec, Compressor):
        return spec
    if spec.kind == "ppm":
        return PPMCompressor(spec.ppm_order)
    if spec.kind == "lz":
        return LZCompressor(spec.dict_size)
    return ExternalCompressor(spec.command)


def compress(spec, data):
    return make_compressor(spec).compress(data)


def decompress(spec, data):
    return make_compressor(spec).decompress(data)


def compressed_length(spec, data):
    """lambda(data): length in bytes of the compressed form of ``data``."""
    return make_compressor(spec).compressed_length(data)


__all__ = [
    "CompressorSpec", "Compressor", "PPMCompressor", "LZCompressor",
    "ExternalCompressor", "make_compressor", "compress", "decompress",
    "compressed_length", "HEADER",
]
