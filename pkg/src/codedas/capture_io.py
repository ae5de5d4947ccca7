"""Bit-exact IQ capture persistence.

File layout (little-endian):
  magic   8 bytes  b"DASIQv01"
  u32     version (1)
  f64     sample_rate_hz
  f64     symbol_rate_baud
  u32     frame_len_samples
  u32     num_frames
  u32     code_recursions
  u32     reserved (0)
  payload num_frames * frame_len samples, each as four float32: xI xQ yI yQ

Samples narrow to float32 on write; reading returns complex64 exactly as
stored, so write->read->write round-trips byte-identically.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .channel import IQCapture

MAGIC = b"DASIQv01"
VERSION = 1
_HEADER = struct.Struct("<8sIddIIII")
HEADER_SIZE = _HEADER.size  # 44 bytes


class CaptureFormatError(ValueError):
    """Capture file violates the documented layout."""


@dataclass(frozen=True)
class CaptureHeader:
    sample_rate_hz: float
    symbol_rate_baud: float
    frame_len: int
    num_frames: int
    code_recursions: int

    @property
    def frame_bytes(self):
        return self.frame_len * 4 * 4

    @property
    def payload_bytes(self):
        return self.num_frames * self.frame_bytes


def _pack_header(h):
    return _HEADER.pack(
        MAGIC,
        VERSION,
        h.sample_rate_hz,
        h.symbol_rate_baud,
        h.frame_len,
        h.num_frames,
        h.code_recursions,
        0,
    )


def _parse_header(raw):
    if len(raw) < HEADER_SIZE:
        raise CaptureFormatError(
            f"file too short for header: {len(raw)} < {HEADER_SIZE} bytes"
        )
    magic, version, fs, fsymb, flen, nf, k, _reserved = _HEADER.unpack(
        raw[:HEADER_SIZE]
    )
    if magic != MAGIC:
        if magic[:6] == MAGIC[:6]:
            raise CaptureFormatError(
                f"unsupported capture version marker {magic!r} (expected {MAGIC!r})"
            )
        raise CaptureFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CaptureFormatError(f"unsupported version {version}")
    if flen <= 0 or nf <= 0:
        raise CaptureFormatError("non-positive frame_len or num_frames")
    return CaptureHeader(fs, fsymb, flen, nf, k)


def _frame_to_f32(frame):
    # (flen, 2) complex -> (flen, 4) float32 as xI xQ yI yQ
    flen = frame.shape[0]
    out = np.empty((flen, 4), dtype=np.float32)
    out[:, 0] = frame[:, 0].real
    out[:, 1] = frame[:, 0].imag
    out[:, 2] = frame[:, 1].real
    out[:, 3] = frame[:, 1].imag
    return out


class CaptureWriter:
    """Streaming frame-by-frame writer.  num_frames is fixed up front; close()
    verifies the promised count was delivered."""

    def __init__(self, path, header):
        self.header = header
        self._written = 0
        self._fh = open(path, "wb")
        self._fh.write(_pack_header(header))

    def write_frame(self, frame):
        frame = np.asarray(frame)
        if frame.shape != (self.header.frame_len, 2):
            raise CaptureFormatError(
                f"frame shape {frame.shape} != ({self.header.frame_len}, 2)"
            )
        if self._written >= self.header.num_frames:
            raise CaptureFormatError("more frames written than declared")
        self._fh.write(_frame_to_f32(frame).tobytes())
        self._written += 1

    def close(self):
        if self._fh is None:
            return
        self._fh.close()
        self._fh = None
        if self._written != self.header.num_frames:
            raise CaptureFormatError(
                f"wrote {self._written} frames, header declares "
                f"{self.header.num_frames}"
            )

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        elif self._fh is not None:
            self._fh.close()
            self._fh = None
        return False


def write_capture(path, capture):
    """Write an IQCapture to disk (samples narrowed to float32)."""
    header = CaptureHeader(
        sample_rate_hz=float(capture.sample_rate_hz),
        symbol_rate_baud=float(capture.symbol_rate_baud),
        frame_len=capture.frame_len,
        num_frames=capture.num_frames,
        code_recursions=capture.code_recursions,
    )
    with CaptureWriter(path, header) as w:
        for f in range(capture.num_frames):
            w.write_frame(capture.samples[f])


class CaptureReader:
    """Streaming reader; validates header and total size before yielding."""

    def __init__(self, path):
        self._fh = open(path, "rb")
        try:
            raw = self._fh.read(HEADER_SIZE)
            self.header = _parse_header(raw)
            self._fh.seek(0, 2)
            actual = self._fh.tell() - HEADER_SIZE
            expected = self.header.payload_bytes
            if actual != expected:
                raise CaptureFormatError(
                    f"payload size mismatch: expected {expected} bytes "
                    f"({self.header.num_frames} frames), found {actual}"
                )
            self._fh.seek(HEADER_SIZE)
        except Exception:
            self._fh.close()
            raise

    def frames(self):
        """Yield (frame_len, 2) complex64 frames in order."""
        flen = self.header.frame_len
        for _ in range(self.header.num_frames):
            buf = self._fh.read(flen * 16)
            if len(buf) != flen * 16:
                raise CaptureFormatError("truncated payload while reading")
            quad = np.frombuffer(buf, dtype="<f4").reshape(flen, 4)
            yield np.ascontiguousarray(quad).view(np.complex64).reshape(flen, 2)

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False


def read_capture(path):
    """Load a capture fully into memory (samples stay complex64 as stored)."""
    with CaptureReader(path) as r:
        h = r.header
        samples = np.empty((h.num_frames, h.frame_len, 2), dtype=np.complex64)
        for i, frame in enumerate(r.frames()):
            samples[i] = frame
    return IQCapture(
        sample_rate_hz=h.sample_rate_hz,
        symbol_rate_baud=h.symbol_rate_baud,
        code_recursions=h.code_recursions,
        samples=samples,
    )
