"""Fixture container: a scene rendered to disk with its ground truth.

Layout: 8-byte magic "MMFIX01\\n", little-endian u32 header length, a
JSON header (script, seed, timestamps in microseconds, per-frame truth
table), then one length-prefixed zlib-compressed raw RGB blob per
frame. Writing is bit-deterministic for a (script, seed) pair: the
header is serialized with sorted keys and the compression level is
pinned, so identical inputs give identical files.
"""

import json
import struct
import zlib
from dataclasses import dataclass

from .color import RgbFrame
from .synth import SceneScript, TrackTruth, synth_sequence

MAGIC = b"MMFIX01\n"
_U32 = struct.Struct("<I")
_ZLIB_LEVEL = 6


def write_fixture(path: str, script: SceneScript, seed: int) -> None:
    frames = []
    truth = []
    for sf in synth_sequence(script, seed):
        frames.append(zlib.compress(sf.frame.to_bytes(), _ZLIB_LEVEL))
        truth.append([tt.to_dict() for tt in sf.truth])
    header = {
        "script": script.to_dict(),
        "seed": seed,
        "width": script.width,
        "height": script.height,
        "fps": script.fps,
        "frame_count": script.frame_count,
        "timestamps_us": script.timestamps_us(),
        "compression": "zlib",
        "truth": truth,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_U32.pack(len(blob)))
        f.write(blob)
        for c in frames:
            f.write(_U32.pack(len(c)))
            f.write(c)


@dataclass
class Fixture:
    script: SceneScript
    seed: int
    timestamps_us: list[int]
    truth: list[list[TrackTruth]]
    _blobs: list[bytes]

    @property
    def frame_count(self) -> int:
        return len(self._blobs)

    @property
    def frame_dims(self) -> tuple[int, int]:
        return self.script.width, self.script.height

    def timestamp(self, i: int) -> float:
        return self.timestamps_us[i] / 1e6

    def frame(self, i: int) -> RgbFrame:
        raw = zlib.decompress(self._blobs[i])
        return RgbFrame.from_bytes(self.script.width, self.script.height, raw)

    def source(self):
        """(frame, timestamp) pairs, the shape run_stream expects."""
        for i in range(self.frame_count):
            yield self.frame(i), self.timestamp(i)

    def track_index(self, color: str) -> int:
        for k, tr in enumerate(self.script.tracks):
            if tr.color == color:
                return k
        raise KeyError(f"no {color} track in fixture")

    def truth_for(self, color: str) -> list[TrackTruth]:
        k = self.track_index(color)
        return [row[k] for row in self.truth]


def _read_exact(f, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise ValueError(f"truncated fixture: wanted {n} bytes, got {len(data)}")
    return data


def read_fixture(path: str) -> Fixture:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"not a fixture file (magic {magic!r})")
        (hlen,) = _U32.unpack(_read_exact(f, 4))
        header = json.loads(_read_exact(f, hlen))
        if header.get("compression") != "zlib":
            raise ValueError(f"unsupported compression {header.get('compression')!r}")
        blobs = []
        for _ in range(header["frame_count"]):
            (n,) = _U32.unpack(_read_exact(f, 4))
            blobs.append(_read_exact(f, n))
        if f.read(1):
            raise ValueError("trailing bytes after last frame")
    script = SceneScript.from_dict(header["script"])
    truth = [[TrackTruth.from_dict(d) for d in row] for row in header["truth"]]
    return Fixture(
        script=script,
        seed=header["seed"],
        timestamps_us=header["timestamps_us"],
        truth=truth,
        _blobs=blobs,
    )
