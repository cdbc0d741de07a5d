"""Streaming service: binary frames in, line-delimited JSON out.

One session at a time feeds one engine instance. Inbound traffic mixes
two message kinds, told apart by their first byte: binary frame
messages starting with the magic "MMF1", and JSON control lines
starting with "{" (currently template calibration). Outbound traffic
is one JSON object per line: a handshake status on connect, then per
processed frame the gesture/cursor events, a tracking status line and
an acknowledgment.

A reader thread parses the socket and hands frames to the processing
loop through a bounded deque that drops the oldest frame when a live
pusher outruns the engine. Replay clients instead pace on the ack
lines, one frame in flight, and therefore never lose frames.
"""

import json
import socket
import struct
import threading
import time
from collections import deque
from dataclasses import replace

from .color import RgbFrame
from .fixtures import Fixture, read_fixture
from .pipeline import Engine, EngineConfig

FRAME_MAGIC = b"MMF1"
# magic, frame_id, width, height, pixel_format, timestamp_us
FRAME_HEADER = struct.Struct("<4sIHHBQ")
PIXEL_FORMAT_RGB8 = 0
PROTO_VERSION = 1
DEFAULT_ENDPOINT = "127.0.0.1:7933"
DEFAULT_MAX_DIM = 4096
QUEUE_FRAMES = 8
_CHUNK = 1 << 20


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {endpoint!r}")
    return host or "127.0.0.1", int(port)


def encode_frame(frame_id: int, frame: RgbFrame, timestamp_us: int) -> bytes:
    header = FRAME_HEADER.pack(
        FRAME_MAGIC, frame_id, frame.width, frame.height, PIXEL_FORMAT_RGB8, timestamp_us
    )
    return header + frame.to_bytes()


def _dump_line(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode() + b"\n"


class _ProtocolError(Exception):
    pass


class _Stream:
    """Buffered reads over a socket with one-byte lookahead."""

    def __init__(self, conn: socket.socket):
        self.conn = conn
        self.buf = bytearray()

    def _fill(self) -> bool:
        data = self.conn.recv(65536)
        if not data:
            return False
        self.buf.extend(data)
        return True

    def peek(self) -> int | None:
        while not self.buf:
            if not self._fill():
                return None
        return self.buf[0]

    def read_exact(self, n: int) -> bytes:
        while len(self.buf) < n:
            if not self._fill():
                raise _ProtocolError(f"connection closed mid-message ({len(self.buf)}/{n} bytes)")
        out = bytes(self.buf[:n])
        del self.buf[:n]
        return out

    def discard(self, n: int) -> None:
        while n > 0:
            take = min(n, len(self.buf))
            if take:
                del self.buf[:take]
                n -= take
                continue
            if not self._fill():
                raise _ProtocolError("connection closed while skipping payload")

    def read_line(self, limit: int = 1 << 16) -> bytes:
        while True:
            idx = self.buf.find(b"\n")
            if idx >= 0:
                out = bytes(self.buf[:idx])
                del self.buf[: idx + 1]
                return out
            if len(self.buf) > limit:
                raise _ProtocolError("control line too long")
            if not self._fill():
                raise _ProtocolError("connection closed mid-line")


class _Session:
    def __init__(self, conn: socket.socket, engine: Engine, max_dim: int, queue_frames: int):
        self.conn = conn
        self.engine = engine
        self.max_dim = max_dim
        self.frames: deque = deque(maxlen=queue_frames)
        self.ctrls: deque = deque()
        self.cv = threading.Condition()
        self.reader_done = False
        self.fatal: str | None = None

    def run(self) -> None:
        self._send({
            "type": "status",
            "state": "ready",
            "proto": PROTO_VERSION,
            "pixel_formats": [PIXEL_FORMAT_RGB8],
            "max_dim": self.max_dim,
        })
        reader = threading.Thread(target=self._read_loop, daemon=True)
        reader.start()
        try:
            self._process_loop()
        except OSError:
            pass  # client went away mid-write
        finally:
            # shutdown, not just close: the reader thread may still be
            # blocked in recv, which would defer the FIN until the client
            # sends more data and deadlock a client waiting for EOF
            try:
                self.conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self.conn.close()
            except OSError:
                pass
            reader.join(timeout=5)

    # reader side

    def _read_loop(self) -> None:
        stream = _Stream(self.conn)
        last_id = -1
        try:
            while True:
                first = stream.peek()
                if first is None:
                    break
                if first == ord("{"):
                    line = stream.read_line()
                    try:
                        obj = json.loads(line)
                    except ValueError as e:
                        raise _ProtocolError(f"bad control line: {e}") from e
                    self._put(("ctrl", obj))
                    continue
                if first != FRAME_MAGIC[0]:
                    raise _ProtocolError(f"unexpected byte 0x{first:02x}, not a frame or control line")
                hdr = stream.read_exact(FRAME_HEADER.size)
                magic, frame_id, width, height, fmt, t_us = FRAME_HEADER.unpack(hdr)
                if magic != FRAME_MAGIC:
                    raise _ProtocolError(f"bad frame magic {magic!r}")
                if fmt != PIXEL_FORMAT_RGB8:
                    raise _ProtocolError(f"unsupported pixel format {fmt}")
                if width == 0 or height == 0:
                    raise _ProtocolError(f"degenerate frame dims {width}x{height}")
                if frame_id <= last_id:
                    raise _ProtocolError(f"frame_id must increase: {frame_id} after {last_id}")
                last_id = frame_id
                payload_len = width * height * 3
                if width > self.max_dim or height > self.max_dim:
                    stream.discard(payload_len)
                    self._put(("reject", frame_id, f"frame {width}x{height} exceeds max dim {self.max_dim}"))
                    continue
                payload = stream.read_exact(payload_len)
                frame = RgbFrame.from_bytes(width, height, payload)
                self._put(("frame", frame_id, frame, t_us))
        except _ProtocolError as e:
            with self.cv:
                self.fatal = str(e)
        except OSError:
            pass
        finally:
            with self.cv:
                self.reader_done = True
                self.cv.notify()

    def _put(self, entry: tuple) -> None:
        with self.cv:
            if entry[0] == "frame":
                self.frames.append(entry)  # deque drops the oldest when full
            else:
                self.ctrls.append(entry)
            self.cv.notify()

    # processing side

    def _process_loop(self) -> None:
        while True:
            with self.cv:
                while not self.ctrls and not self.frames and not self.reader_done:
                    self.cv.wait()
                entry = None
                if self.ctrls:
                    entry = self.ctrls.popleft()
                elif self.frames:
                    entry = self.frames.popleft()
                elif self.reader_done:
                    break
            if entry is None:
                continue
            kind = entry[0]
            if kind == "ctrl":
                self._handle_ctrl(entry[1])
            elif kind == "reject":
                self._send({"type": "error", "frame_id": entry[1], "message": entry[2]})
            else:
                _, frame_id, frame, t_us = entry
                try:
                    report = self.engine.process_frame(frame, t_us / 1e6)
                except ValueError as e:
                    self._send({"type": "error", "frame_id": frame_id, "message": str(e)})
                    return
                for ev in report.events:
                    self._send(ev.to_dict() | {"frame_id": frame_id})
                self._send({
                    "type": "status",
                    "frame_id": frame_id,
                    "red": report.red.track_status.value,
                    "green": report.green.track_status.value,
                })
                self._send({"type": "ack", "frame_id": frame_id})
        if self.fatal is not None:
            self._send({"type": "error", "message": self.fatal})

    def _handle_ctrl(self, obj: dict) -> None:
        cmd = obj.get("cmd")
        if cmd == "calibrate":
            color = obj.get("color")
            if color not in ("red", "green"):
                self._send({"type": "error", "message": f"calibrate: bad color {color!r}"})
                return
            try:
                hue, sat = int(obj["hue"]), int(obj["sat"])
                key = f"{color}_template"
                tpl = replace(getattr(self.engine.cfg, key), ref_hue=hue, ref_sat=sat)
                self.engine.cfg = replace(self.engine.cfg, **{key: tpl})
            except (KeyError, ValueError) as e:
                self._send({"type": "error", "message": f"calibrate: {e}"})
                return
            self._send({
                "type": "status", "state": "calibrated", "color": color, "hue": hue, "sat": sat,
            })
        else:
            self._send({"type": "error", "message": f"unknown command {cmd!r}"})

    def _send(self, obj: dict) -> None:
        self.conn.sendall(_dump_line(obj))


class Server:
    """Sequential single-session server; each connection gets a fresh
    engine built from the same config."""

    def __init__(
        self,
        cfg: EngineConfig | None = None,
        endpoint: str = "127.0.0.1:0",
        max_dim: int = DEFAULT_MAX_DIM,
        queue_frames: int = QUEUE_FRAMES,
    ):
        self.cfg = cfg
        self.max_dim = max_dim
        self.queue_frames = queue_frames
        host, port = parse_endpoint(endpoint)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(1)
        self._sock.settimeout(0.25)
        self._stop = False
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> str:
        host, port = self._sock.getsockname()
        return f"{host}:{port}"

    def serve_forever(self) -> None:
        while not self._stop:
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with conn:
                conn.settimeout(None)
                _Session(conn, Engine(self.cfg), self.max_dim, self.queue_frames).run()
        self._sock.close()

    def start_background(self) -> "Server":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def shutdown(self) -> None:
        self._stop = True
        if self._thread is not None:
            self._thread.join(timeout=10)
            self._thread = None


def serve(cfg: EngineConfig | None, endpoint: str, max_dim: int = DEFAULT_MAX_DIM) -> None:
    """Blocking entry point used by the command line."""
    server = Server(cfg, endpoint, max_dim)
    print(f"listening on {server.endpoint}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def push_session(
    fixture: Fixture | str,
    endpoint: str,
    as_fast_as_possible: bool = True,
    skip: int = 1,
    timeout: float = 60.0,
) -> list[dict]:
    """Stream a fixture's frames to a running server, pacing one frame
    per acknowledgment, and return every JSON line received in order.

    skip > 1 sends only every skip-th frame (the engine then sees the
    larger timestamp gaps). Without as_fast_as_possible, sending also
    honors the fixture's native frame spacing.
    """
    if isinstance(fixture, str):
        fixture = read_fixture(fixture)
    host, port = parse_endpoint(endpoint)
    log: list[dict] = []
    with socket.create_connection((host, port), timeout=timeout) as sock:
        sock.settimeout(timeout)
        stream = _Stream(sock)

        def read_obj() -> dict:
            obj = json.loads(stream.read_line())
            log.append(obj)
            return obj

        hello = read_obj()
        if hello.get("proto") != PROTO_VERSION:
            raise ValueError(f"unexpected handshake {hello}")
        start = time.monotonic()
        t0_us = fixture.timestamps_us[0] if fixture.frame_count else 0
        for i in range(0, fixture.frame_count, skip):
            t_us = fixture.timestamps_us[i]
            if not as_fast_as_possible:
                due = start + (t_us - t0_us) / 1e6
                delay = due - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            sock.sendall(encode_frame(i, fixture.frame(i), t_us))
            while True:
                obj = read_obj()
                if obj.get("type") == "error" and "frame_id" not in obj:
                    raise RuntimeError(f"server error: {obj.get('message')}")
                if obj.get("type") == "ack" and obj.get("frame_id") == i:
                    break
        sock.shutdown(socket.SHUT_WR)
        try:
            while True:
                line = stream.read_line()
                log.append(json.loads(line))
        except _ProtocolError:
            pass  # server closed after draining
    return log
