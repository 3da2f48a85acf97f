"""JSON Lines transcripts and bit-exact replay.

Line 1 is ``{"header": {...}}`` with the full session config (seed
included), the message and the attack; every further line is one
RoundRecord with exactly its schema fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .adversaries import make_adversary
from .errors import InvalidArgument
from .protocol import RoundRecord, SessionConfig, SessionResult, check_message, run_session

FORMAT_VERSION = 1


class TranscriptFormatError(InvalidArgument):
    pass


def header(config: SessionConfig, message, attack: str, attack_options: Optional[dict] = None) -> dict:
    return {
        "format": FORMAT_VERSION,
        "config": config.to_dict(),
        "message": list(message),
        "attack": attack,
        "attack_options": dict(attack_options or {}),
    }


def dumps(head: dict, result: SessionResult) -> str:
    lines = [json.dumps({"header": head}, sort_keys=True)]
    lines += [json.dumps(r.to_dict(), sort_keys=True) for r in result.transcript]
    return "\n".join(lines) + "\n"


def write_transcript(path, head: dict, result: SessionResult) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(head, result))
    return path


def read_transcript(path) -> tuple[dict, list[dict]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        rows = [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise TranscriptFormatError(f"not JSON Lines: {exc}") from None
    if not rows or set(rows[0]) != {"header"}:
        raise TranscriptFormatError("first line must be the session header")
    head = rows[0]["header"]
    for key in ("format", "config", "message", "attack"):
        if key not in head:
            raise TranscriptFormatError(f"header lacks {key!r}")
    if head["format"] != FORMAT_VERSION:
        raise TranscriptFormatError(f"unsupported transcript format {head['format']!r}")
    records = rows[1:]
    for i, rec in enumerate(records, start=2):
        try:
            RoundRecord.from_dict(rec)  # schema check
        except (InvalidArgument, KeyError, TypeError, ValueError) as exc:
            raise TranscriptFormatError(f"line {i}: {exc}") from None
    return head, records


def run_from_header(head: dict) -> SessionResult:
    try:
        config = SessionConfig.from_dict(head["config"])
        adversary = make_adversary(head["attack"], head.get("attack_options"))
        message = check_message(head["message"], config.n_messages)
    except (KeyError, TypeError, ValueError) as exc:
        raise TranscriptFormatError(f"bad header: {exc}") from None
    return run_session(config, message, adversary)


@dataclass
class ReplayReport:
    identical: bool
    rounds: int
    first_divergence: Optional[int] = None  # list index of the first differing record
    recorded: Optional[dict] = None
    replayed: Optional[dict] = None


def replay(path) -> ReplayReport:
    head, recorded = read_transcript(path)
    result = run_from_header(head)
    replayed = [r.to_dict() for r in result.transcript]
    for i in range(max(len(recorded), len(replayed))):
        old = recorded[i] if i < len(recorded) else None
        new = replayed[i] if i < len(replayed) else None
        if old != new:
            return ReplayReport(False, len(replayed), i, old, new)
    return ReplayReport(True, len(replayed))
