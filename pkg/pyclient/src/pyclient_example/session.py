"""Server half of the line-delimited JSON classifier protocol.

The engine speaks first. {"type": "hello", "n": ..., "labels": ...}
fixes the input dimension and the label-set size; the reply is
{"type": "ready"}. Classify requests then carry either a full
bit-string "base" (cached for the rest of the session) or "flips", a
list of coordinate indices XORed against that cached base. Flips never
mutate the cache: every flips-only request is relative to the last base
the engine shipped, which is exactly how the engine does its
bookkeeping on the other end.

Every request that carries an id gets exactly one response with that
id. Anything malformed - bad JSON, a request before the handshake, an
out-of-range flip, a classifier misbehaving - produces
{"type": "error", "id": ..., "msg": ...} and the loop keeps serving.
{"type": "bye"} or end of input ends the session with exit code 0.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from typing import IO, Callable, Optional, Tuple

__all__ = ["ClassifyFn", "ProtocolSession", "serve"]

ClassifyFn = Callable[[Tuple[int, ...]], int]


def _encode(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


def _error(request_id, msg: str) -> dict:
    return {"type": "error", "id": request_id, "msg": msg}


def _parse_base(text, n: int) -> Optional[int]:
    """Bit-string to packed bits; character i is coordinate i."""
    if not isinstance(text, str) or len(text) != n or set(text) - {"0", "1"}:
        return None
    return int(text[::-1], 2)


@dataclass
class ProtocolSession:
    """Wire state: dimensions from the handshake plus the cached base."""

    classify_fn: ClassifyFn
    n: Optional[int] = None
    label_count: Optional[int] = None
    base_bits: Optional[int] = None

    def handle_line(self, raw: str) -> Tuple[Optional[dict], bool]:
        """(response record or None, session finished) for one input line."""
        line = raw.strip()
        if not line:
            return None, False
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            return _error(None, "request is not valid JSON"), False
        if not isinstance(record, dict) or "type" not in record:
            rid = record.get("id") if isinstance(record, dict) else None
            return _error(rid, "request is not a typed record"), False

        rtype = record["type"]
        if rtype == "hello":
            return self._handle_hello(record), False
        if rtype == "classify":
            return self._handle_classify(record), False
        if rtype == "bye":
            return None, True
        return _error(record.get("id"), f"unknown record type {rtype!r}"), False

    def _handle_hello(self, record: dict) -> dict:
        n = record.get("n")
        labels = record.get("labels")
        ok = (
            isinstance(n, int)
            and isinstance(labels, int)
            and not isinstance(n, bool)
            and not isinstance(labels, bool)
            and n >= 1
            and labels >= 1
        )
        if not ok:
            return _error(record.get("id"), "hello must carry positive integers n and labels")
        # a fresh handshake resets the session, cached base included
        self.n = n
        self.label_count = labels
        self.base_bits = None
        return {"type": "ready"}

    def _handle_classify(self, record: dict) -> dict:
        rid = record.get("id")
        if rid is None:
            return _error(None, "classify request has no id")
        if self.n is None or self.label_count is None:
            return _error(rid, "no handshake yet")
        n = self.n

        if "base" in record:
            parsed = _parse_base(record["base"], n)
            if parsed is None:
                return _error(rid, f"base must be a string of {n} '0'/'1' characters")
            self.base_bits = parsed
        if self.base_bits is None:
            return _error(rid, "no base vector cached yet")

        flips = record.get("flips", [])
        if not isinstance(flips, list) or any(
            not isinstance(i, int) or isinstance(i, bool) for i in flips
        ):
            return _error(rid, "flips must be a list of integers")
        bits = self.base_bits
        for i in flips:
            if not 0 <= i < n:
                return _error(rid, f"flip index {i} outside [0, {n})")
            bits ^= 1 << i

        vector = tuple((bits >> i) & 1 for i in range(n))
        try:
            label = int(self.classify_fn(vector))
        except Exception as exc:
            return _error(rid, f"classifier failed: {exc!r}")
        if not 0 <= label < self.label_count:
            return _error(
                rid, f"classifier returned label {label} outside [0, {self.label_count})"
            )
        return {"type": "label", "id": rid, "label": label}


def serve(
    classify_fn: ClassifyFn,
    stdin: Optional[IO[str]] = None,
    stdout: Optional[IO[str]] = None,
) -> int:
    """Answer protocol requests line by line until bye or end of input."""
    inp = sys.stdin if stdin is None else stdin
    out = sys.stdout if stdout is None else stdout
    session = ProtocolSession(classify_fn)
    for raw in inp:
        response, done = session.handle_line(raw)
        if response is not None:
            out.write(_encode(response) + "\n")
            out.flush()
        if done:
            break
    return 0
