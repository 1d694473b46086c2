"""External base classifiers over child-process standard I/O.

Records are line-delimited JSON objects with a "type" field. The engine
opens the session with {"type": "hello", "n": ..., "labels": ...} and
expects {"type": "ready"}. Each classification request is
{"type": "classify", "id": ..., "base": "0101...", "flips": [...]};
"base" is optional and, when present, replaces the child's cached base
vector. The child answers {"type": "label", "id": ..., "label": ...}
and may report {"type": "error", "id": ..., "msg": ...}. The engine
closes with {"type": "bye"}.

Inputs travel as flip indices against the cached base when that is
compact, or as a fresh full bit-string when the flips would be larger;
the engine tracks what the child has cached and picks per request.

Requests for a batch are written from a helper thread while the main
thread drains responses, so a child that answers as it reads can never
deadlock against a full pipe. Responses may arrive in any order; they
are matched to requests by id.
"""

from __future__ import annotations

import json
import os
import selectors
import shlex
import subprocess
import threading
import time
from typing import Dict, List, Optional, Sequence, Union

from .bitspace import FlipMask, Label, StructureVector

__all__ = [
    "ChildExitError",
    "ChildReportedError",
    "HandshakeError",
    "IdMismatchError",
    "MalformedResponseError",
    "ProtocolClassifier",
    "ProtocolEndpoint",
    "ProtocolError",
    "ProtocolTimeoutError",
    "protocol_classify",
]

DEFAULT_TIMEOUT = 30.0

# rough JSON cost of one flip index; used only to pick an encoding
_FLIP_CHAR_COST = 6
_REBASE_OVERHEAD = 16


class ProtocolError(RuntimeError):
    """Base for everything that can go wrong on the wire."""


class HandshakeError(ProtocolError):
    pass


class MalformedResponseError(ProtocolError):
    pass


class IdMismatchError(ProtocolError):
    pass


class ProtocolTimeoutError(ProtocolError):
    pass


class ChildExitError(ProtocolError):
    pass


class ChildReportedError(ProtocolError):
    """The child sent a well-formed {"type": "error"} record."""


def _encode(record: dict) -> bytes:
    return json.dumps(record, separators=(",", ":")).encode("ascii") + b"\n"


class ProtocolEndpoint:
    """One child process speaking the classifier protocol.

    Exactly one thread may call classify_masks at a time; the endpoint
    owns the child's pipes. sent_base_count and sent_flips_count expose
    which encoding each request used, mostly for tests.
    """

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        timeout: float = DEFAULT_TIMEOUT,
    ) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ValueError("empty classifier command")
        self.timeout = float(timeout)
        self._proc: Optional[subprocess.Popen] = None
        self._buffer = b""
        self._next_id = 0
        self._last_ack: Optional[int] = None
        self._base_bits: Optional[int] = None  # session base, set at handshake
        self._cached_bits: Optional[int] = None  # what the child currently holds
        self._n: Optional[int] = None
        self.sent_base_count = 0
        self.sent_flips_count = 0

    # -- lifecycle -----------------------------------------------------

    def start(self) -> None:
        if self._proc is not None:
            return
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=None,
            bufsize=0,
        )

    def handshake(self, base: StructureVector, labels: int) -> None:
        """Start the child if needed, greet it, and fix the session base."""
        if labels < 1:
            raise ValueError("label count must be positive")
        self.start()
        self._n = base.n
        self._base_bits = base.bits
        self._cached_bits = None
        self._write_now(_encode({"type": "hello", "n": base.n, "labels": labels}))
        record = self._read_record(deadline=time.monotonic() + self.timeout)
        if record.get("type") != "ready":
            raise HandshakeError(f"expected a ready record, got {record!r}")

    def close(self) -> None:
        proc = self._proc
        if proc is None:
            return
        try:
            if proc.stdin and not proc.stdin.closed:
                try:
                    proc.stdin.write(_encode({"type": "bye"}))
                    proc.stdin.flush()
                except (BrokenPipeError, OSError):
                    pass
                proc.stdin.close()
            try:
                proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        finally:
            self._proc = None

    def __enter__(self) -> "ProtocolEndpoint":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- request plumbing ----------------------------------------------

    def _require_session(self) -> subprocess.Popen:
        if self._proc is None or self._base_bits is None or self._n is None:
            raise ProtocolError("handshake has not completed")
        return self._proc

    def _write_now(self, payload: bytes) -> None:
        proc = self._proc
        if proc is None or proc.stdin is None:
            raise ProtocolError("child process is not running")
        try:
            proc.stdin.write(payload)
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ChildExitError(
                f"child closed its input; last acknowledged id {self._last_ack}"
            ) from exc

    def _encode_request(self, rid: int, x_bits: int) -> bytes:
        n = self._n
        assert n is not None
        record: dict
        if self._cached_bits is None:
            rebase = True
        else:
            rel = x_bits ^ self._cached_bits
            flips_cost = rel.bit_count() * _FLIP_CHAR_COST
            rebase = flips_cost > n + _REBASE_OVERHEAD
        if rebase:
            base_str = StructureVector(x_bits, n).to_string()
            record = {"type": "classify", "id": rid, "base": base_str, "flips": []}
            self._cached_bits = x_bits
            self.sent_base_count += 1
        else:
            rel = x_bits ^ self._cached_bits
            record = {
                "type": "classify",
                "id": rid,
                "flips": list(FlipMask(rel, n).support()),
            }
            self.sent_flips_count += 1
        return _encode(record)

    def _read_record(self, deadline: float) -> dict:
        """One JSON record from the child, honoring the deadline."""
        proc = self._proc
        if proc is None or proc.stdout is None:
            raise ProtocolError("child process is not running")
        fd = proc.stdout.fileno()
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        try:
            while True:
                newline = self._buffer.find(b"\n")
                if newline >= 0:
                    line = self._buffer[:newline]
                    self._buffer = self._buffer[newline + 1 :]
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise MalformedResponseError(
                            f"response is not valid JSON: {line[:200]!r}"
                        ) from exc
                    if not isinstance(record, dict) or "type" not in record:
                        raise MalformedResponseError(
                            f"response is not a typed record: {line[:200]!r}"
                        )
                    return record
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ProtocolTimeoutError(
                        f"no response within {self.timeout}s; "
                        f"last acknowledged id {self._last_ack}"
                    )
                if not sel.select(timeout=remaining):
                    continue
                chunk = os.read(fd, 65536)
                if chunk == b"":
                    raise ChildExitError(
                        f"child exited before answering; "
                        f"last acknowledged id {self._last_ack}"
                    )
                self._buffer += chunk
        finally:
            sel.close()

    def classify_masks(self, masks: Sequence[FlipMask]) -> List[Label]:
        """Labels for base-xor-mask inputs, in the order the masks came in."""
        proc = self._require_session()
        if not masks:
            return []
        n = self._n
        base_bits = self._base_bits
        assert n is not None and base_bits is not None

        payload_parts: List[bytes] = []
        pending: Dict[int, int] = {}
        for pos, mask in enumerate(masks):
            if mask.n != n:
                raise ValueError(
                    f"mask dimension {mask.n} does not match session dimension {n}"
                )
            rid = self._next_id
            self._next_id += 1
            payload_parts.append(self._encode_request(rid, base_bits ^ mask.bits))
            pending[rid] = pos
        payload = b"".join(payload_parts)

        write_error: List[BaseException] = []

        def _writer() -> None:
            try:
                assert proc.stdin is not None
                proc.stdin.write(payload)
                proc.stdin.flush()
            except BaseException as exc:  # surfaced by the reader as EOF
                write_error.append(exc)

        thread = threading.Thread(target=_writer, daemon=True)
        thread.start()

        results: List[Optional[Label]] = [None] * len(masks)
        deadline = time.monotonic() + self.timeout
        try:
            while pending:
                record = self._read_record(deadline)
                rtype = record.get("type")
                if rtype == "error":
                    raise ChildReportedError(
                        f"child reported an error: {record.get('msg')!r} "
                        f"(id {record.get('id')})"
                    )
                if rtype != "label":
                    raise MalformedResponseError(
                        f"expected a label record, got type {rtype!r}"
                    )
                rid = record.get("id")
                label = record.get("label")
                if not isinstance(rid, int) or isinstance(rid, bool):
                    raise MalformedResponseError(f"label record has bad id: {record!r}")
                if not isinstance(label, int) or isinstance(label, bool) or label < 0:
                    raise MalformedResponseError(
                        f"label record has bad label: {record!r}"
                    )
                if rid not in pending:
                    raise IdMismatchError(
                        f"response id {rid} matches no outstanding request"
                    )
                results[pending.pop(rid)] = Label(label)
                self._last_ack = rid
        finally:
            thread.join(timeout=1.0)
        out: List[Label] = []
        for lab in results:
            if lab is None:
                raise ProtocolError("response bookkeeping lost a request")
            out.append(lab)
        return out


def protocol_classify(
    endpoint: ProtocolEndpoint, masks: Sequence[FlipMask]
) -> List[Label]:
    """Batch classification over an endpoint whose handshake has completed."""
    return endpoint.classify_masks(masks)


class ProtocolClassifier:
    """BaseClassifier adapter driving a protocol child.

    The session base is the first vector ever classified; every later
    input is shipped as its difference from whatever the child has
    cached. The smoothing pipeline always smooths around a fixed s, so
    that first vector is the natural anchor.
    """

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        label_count: int,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> None:
        if label_count < 1:
            raise ValueError("label_count must be positive")
        self.label_count = label_count
        self.endpoint = ProtocolEndpoint(command, timeout=timeout)
        self._ready = False

    def classify(self, batch: Sequence[StructureVector]) -> List[Label]:
        if not batch:
            return []
        if not self._ready:
            self.endpoint.handshake(batch[0], self.label_count)
            self._ready = True
        base_bits = self.endpoint._base_bits
        n = self.endpoint._n
        assert base_bits is not None and n is not None
        masks = []
        for x in batch:
            if x.n != n:
                raise ValueError(
                    f"input dimension {x.n} does not match session dimension {n}"
                )
            masks.append(FlipMask(x.bits ^ base_bits, n))
        return self.endpoint.classify_masks(masks)

    def close(self) -> None:
        self.endpoint.close()

    def __enter__(self) -> "ProtocolClassifier":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
