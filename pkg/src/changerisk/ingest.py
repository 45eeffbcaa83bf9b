"""Readers, writers and linkers for change-request exports and revision logs.

The normalized interchange format is JSONL.  CVS rlog output and git logs
with per-file numstat lines are parsed into the same records, so everything
downstream of this module is format-agnostic.
"""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Sequence

from .errors import ConfigError, ParseError
from .textprep import descriptive_tokens, rank_descriptors, token_set

DEFAULT_ID_PATTERNS = (r"CR-\d+", r"#(\d+)", r"[Bb]ug[ #:]*(\d+)")

DEFAULT_MIN_TOKEN_OVERLAP = 2

LINK_MODES = ("explicit_id", "token_overlap", "both")


@dataclass(frozen=True)
class ChangeRequest:
    """One tracker entry awaiting classification."""

    id: str
    short_desc: str = ""
    long_desc: str = ""
    kind_hint: str | None = None
    ground_truth: bool | None = None


@dataclass(frozen=True)
class RevisionEvent:
    """One (revision, code block) pair from a version-history log."""

    revision_id: str
    code_block_id: str
    timestamp: datetime
    message: str
    linked_cr_ids: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class CodeBlock:
    id: str
    revision_count_total: int


def _read_text(source: bytes | bytearray | IO[bytes], stage: str) -> str:
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}",
                         offset=exc.start, stage=stage) from exc


def _parse_instant(value: str) -> datetime:
    """Parse an RFC 3339 timestamp and pin it to UTC."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _instant_to_str(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _require_str(record: dict, key: str, lineno: int, *,
                 default: str | None = None) -> str:
    value = record.get(key, default)
    if not isinstance(value, str):
        raise ParseError(f"field {key!r} must be a string, got {value!r}",
                         line=lineno, stage="ingest")
    return value


def parse_change_requests(source, format: str = "jsonl") -> list[ChangeRequest]:
    """Parse a change-request export into ChangeRequest records.

    Supported formats: ``jsonl`` (keys id, short, long, optional kind_hint,
    optional fault) and ``csv`` (same column names).  Duplicate ids and
    records with both descriptions empty are rejected.
    """
    text = _read_text(source, "ingest")
    if format == "jsonl":
        rows = _change_request_rows_jsonl(text)
    elif format == "csv":
        rows = _change_request_rows_csv(text)
    else:
        raise ConfigError(f"unknown change-request format {format!r}")

    out: list[ChangeRequest] = []
    seen: set[str] = set()
    for lineno, record in rows:
        cr_id = _require_str(record, "id", lineno)
        if not cr_id:
            raise ParseError("field 'id' must be non-empty", line=lineno,
                             stage="ingest")
        if cr_id in seen:
            raise ParseError(f"duplicate change-request id {cr_id!r}",
                             line=lineno, stage="ingest")
        seen.add(cr_id)
        short = _require_str(record, "short", lineno, default="")
        long_ = _require_str(record, "long", lineno, default="")
        if not short and not long_:
            raise ParseError(f"request {cr_id!r} has no description",
                             line=lineno, stage="ingest")
        hint = record.get("kind_hint")
        if hint is not None and not isinstance(hint, str):
            raise ParseError(f"field 'kind_hint' must be a string, got {hint!r}",
                             line=lineno, stage="ingest")
        fault = record.get("fault")
        if fault is not None and not isinstance(fault, bool):
            raise ParseError(f"field 'fault' must be a boolean, got {fault!r}",
                             line=lineno, stage="ingest")
        out.append(ChangeRequest(id=cr_id, short_desc=short, long_desc=long_,
                                 kind_hint=hint, ground_truth=fault))
    return out


def _change_request_rows_jsonl(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=lineno,
                             stage="ingest") from exc
        if not isinstance(record, dict):
            raise ParseError("expected a JSON object", line=lineno,
                             stage="ingest")
        yield lineno, record


_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}


def _change_request_rows_csv(text: str):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return
    if "id" not in reader.fieldnames:
        raise ParseError("missing required column 'id'", line=1, stage="ingest")
    for row in reader:
        lineno = reader.line_num
        record: dict = {"id": row.get("id") or ""}
        for key in ("short", "long"):
            record[key] = row.get(key) or ""
        hint = row.get("kind_hint")
        if hint:
            record["kind_hint"] = hint
        raw_fault = (row.get("fault") or "").strip().lower()
        if raw_fault:
            if raw_fault not in _BOOL_WORDS:
                raise ParseError(f"field 'fault' must be boolean-like, got {raw_fault!r}",
                                 line=lineno, stage="ingest")
            record["fault"] = _BOOL_WORDS[raw_fault]
        yield lineno, record


def parse_revision_log(source, format: str = "jsonl") -> list[RevisionEvent]:
    """Parse a revision log into normalized (revision, code block) events.

    Formats: ``jsonl`` (keys rev, block, ts, msg, optional crs),
    ``cvs_rlog`` (stanza output of ``cvs rlog``), and ``git_log``
    (``git log`` output carrying per-file numstat lines).
    """
    text = _read_text(source, "ingest")
    if format == "jsonl":
        events = _parse_revisions_jsonl(text)
    elif format == "cvs_rlog":
        events = _parse_cvs_rlog(text)
    elif format == "git_log":
        events = _parse_git_log(text)
    else:
        raise ConfigError(f"unknown revision-log format {format!r}")
    _check_event_pairs(events)
    return events


def _check_event_pairs(events: Sequence[RevisionEvent]) -> None:
    seen: set[tuple[str, str]] = set()
    for ev in events:
        pair = (ev.revision_id, ev.code_block_id)
        if pair in seen:
            raise ParseError(f"duplicate (revision, block) pair {pair!r}",
                             stage="ingest")
        seen.add(pair)


def _parse_revisions_jsonl(text: str) -> list[RevisionEvent]:
    events: list[RevisionEvent] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=lineno,
                             stage="ingest") from exc
        if not isinstance(record, dict):
            raise ParseError("expected a JSON object", line=lineno,
                             stage="ingest")
        rev = _require_str(record, "rev", lineno)
        block = _require_str(record, "block", lineno)
        if not rev or not block:
            raise ParseError("fields 'rev' and 'block' must be non-empty",
                             line=lineno, stage="ingest")
        ts_raw = _require_str(record, "ts", lineno)
        try:
            ts = _parse_instant(ts_raw)
        except ValueError as exc:
            raise ParseError(f"invalid timestamp {ts_raw!r}", line=lineno,
                             stage="ingest") from exc
        msg = _require_str(record, "msg", lineno, default="")
        crs = record.get("crs", [])
        if (not isinstance(crs, list)
                or any(not isinstance(c, str) for c in crs)):
            raise ParseError(f"field 'crs' must be a list of strings, got {crs!r}",
                             line=lineno, stage="ingest")
        events.append(RevisionEvent(revision_id=rev, code_block_id=block,
                                    timestamp=ts, message=msg,
                                    linked_cr_ids=tuple(crs)))
    return events


def _lines_with_offsets(text: str) -> list[tuple[int, str]]:
    out = []
    offset = 0
    for raw in text.split("\n"):
        out.append((offset, raw.rstrip("\r")))
        offset += len(raw.encode("utf-8")) + 1
    return out


_CVS_DATE_FORMATS = ("%Y/%m/%d %H:%M:%S %z", "%Y/%m/%d %H:%M:%S",
                     "%Y-%m-%d %H:%M:%S %z", "%Y-%m-%d %H:%M:%S")


def _parse_cvs_date(value: str) -> datetime:
    for fmt in _CVS_DATE_FORMATS:
        try:
            dt = datetime.strptime(value, fmt)
        except ValueError:
            continue
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.astimezone(timezone.utc)
    raise ValueError(value)


def _is_separator(line: str) -> bool:
    stripped = line.strip()
    return (len(stripped) >= 10
            and (set(stripped) == {"-"} or set(stripped) == {"="}))


def _parse_cvs_rlog(text: str) -> list[RevisionEvent]:
    lines = _lines_with_offsets(text)
    events: list[RevisionEvent] = []
    rcs_file: str | None = None
    working_file: str | None = None
    in_stanzas = False
    i = 0
    while i < len(lines):
        offset, line = lines[i]
        if line.startswith("RCS file:"):
            rcs_file = line.split(":", 1)[1].strip()
            if rcs_file.endswith(",v"):
                rcs_file = rcs_file[:-2]
            working_file = None
            in_stanzas = False
        elif line.startswith("Working file:"):
            working_file = line.split(":", 1)[1].strip()
        elif line.strip() == "description:":
            in_stanzas = True
        elif in_stanzas and line.startswith("revision "):
            block = working_file or rcs_file
            if not block:
                raise ParseError("revision stanza before any RCS file header",
                                 offset=offset, stage="ingest")
            parts = line.split()
            if len(parts) < 2:
                raise ParseError("revision line carries no revision number",
                                 offset=offset, stage="ingest")
            rev = parts[1]
            if i + 1 >= len(lines) or not lines[i + 1][1].startswith("date:"):
                raise ParseError(f"revision {rev} is not followed by a date: line",
                                 offset=offset, stage="ingest")
            date_offset, date_line = lines[i + 1]
            raw_date = date_line.split(";", 1)[0].split(":", 1)[1].strip()
            try:
                ts = _parse_cvs_date(raw_date)
            except ValueError as exc:
                raise ParseError(f"unparseable date {raw_date!r}",
                                 offset=date_offset, stage="ingest") from exc
            i += 2
            # optional branches: line, then message until the next separator
            if i < len(lines) and lines[i][1].startswith("branches:"):
                i += 1
            msg_lines: list[str] = []
            while i < len(lines):
                _, body = lines[i]
                if _is_separator(body) or body.startswith("RCS file:"):
                    break
                msg_lines.append(body)
                i += 1
            msg = "\n".join(msg_lines).strip("\n")
            events.append(RevisionEvent(revision_id=rev, code_block_id=block,
                                        timestamp=ts, message=msg))
            continue
        elif _is_separator(line) and line.strip().startswith("="):
            in_stanzas = False
        i += 1
    return events


_NUMSTAT_RE = re.compile(r"^(\d+|-)\t(\d+|-)\t(.+)$")
_GIT_DATE_FORMAT = "%a %b %d %H:%M:%S %Y %z"


def _parse_git_date(value: str) -> datetime:
    try:
        return datetime.strptime(value, _GIT_DATE_FORMAT).astimezone(timezone.utc)
    except ValueError:
        return _parse_instant(value)


def _parse_git_log(text: str) -> list[RevisionEvent]:
    lines = _lines_with_offsets(text)
    events: list[RevisionEvent] = []
    rev: str | None = None
    rev_offset = 0
    ts: datetime | None = None
    msg_lines: list[str] = []
    files: list[str] = []
    in_headers = False

    def flush() -> None:
        nonlocal rev, ts, msg_lines, files
        if rev is None:
            return
        if ts is None:
            raise ParseError(f"commit {rev} has no Date: header",
                             offset=rev_offset, stage="ingest")
        msg = "\n".join(msg_lines).strip("\n")
        for path in files:
            events.append(RevisionEvent(revision_id=rev, code_block_id=path,
                                        timestamp=ts, message=msg))
        rev, ts, msg_lines, files = None, None, [], []

    for offset, line in lines:
        if line.startswith("commit ") and not line.startswith("    "):
            flush()
            parts = line.split()
            if len(parts) < 2:
                raise ParseError("commit line carries no hash", offset=offset,
                                 stage="ingest")
            rev = parts[1]
            rev_offset = offset
            in_headers = True
            continue
        if rev is None:
            if line.strip():
                raise ParseError(f"unexpected content outside a commit: {line!r}",
                                 offset=offset, stage="ingest")
            continue
        if in_headers:
            if not line.strip():
                in_headers = False
                continue
            if line.startswith("Date:"):
                raw = line.split(":", 1)[1].strip()
                try:
                    ts = _parse_git_date(raw)
                except ValueError as exc:
                    raise ParseError(f"unparseable date {raw!r}", offset=offset,
                                     stage="ingest") from exc
            elif not re.match(r"^[A-Za-z-]+:", line):
                raise ParseError(f"unexpected header line {line!r}",
                                 offset=offset, stage="ingest")
            continue
        if line.startswith("    "):
            msg_lines.append(line[4:])
            continue
        if not line.strip():
            continue
        numstat = _NUMSTAT_RE.match(line)
        if numstat:
            files.append(numstat.group(3))
            continue
        raise ParseError(f"unrecognized log line {line!r}", offset=offset,
                         stage="ingest")
    flush()
    return events


def link_revisions(events: Sequence[RevisionEvent],
                   crs: Sequence[ChangeRequest],
                   mode: str = "both", *,
                   id_patterns: Sequence[str] = DEFAULT_ID_PATTERNS,
                   min_overlap: int = DEFAULT_MIN_TOKEN_OVERLAP,
                   stop_words: frozenset[str] | None = None,
                   stemmer: str = "suffix") -> list[RevisionEvent]:
    """Attach change-request ids to revision events by message content.

    ``explicit_id`` scans messages with the configured id patterns; a match
    (or any of its capture groups) that equals a known request id links the
    event.  ``token_overlap`` links the single request whose descriptive
    tokens share the most tokens with the message, when the overlap reaches
    ``min_overlap``; ties go to the smallest request id.  ``both`` applies
    the two mechanisms together.  Pre-existing links are always kept.
    """
    if mode not in LINK_MODES:
        raise ConfigError(f"unknown link mode {mode!r}")
    known_ids = {cr.id for cr in crs}
    compiled = [re.compile(p) for p in id_patterns]
    descriptors = None
    if mode in ("token_overlap", "both"):
        descriptors = [descriptive_tokens(cr, stop_words=stop_words,
                                          stemmer=stemmer) for cr in crs]

    linked_events: list[RevisionEvent] = []
    for ev in events:
        linked = set(ev.linked_cr_ids)
        if mode in ("explicit_id", "both"):
            for pattern in compiled:
                for match in pattern.finditer(ev.message):
                    for candidate in (match.group(0), *match.groups()):
                        if candidate in known_ids:
                            linked.add(candidate)
        if descriptors:
            query = token_set("", ev.message, stop_words=stop_words,
                              stemmer=stemmer)
            ranked = rank_descriptors(query, descriptors)
            if ranked and ranked[0].score >= min_overlap:
                linked.add(ranked[0].descriptor_id)
        linked_events.append(replace(ev, linked_cr_ids=tuple(sorted(linked))))
    return linked_events


def code_blocks(events: Iterable[RevisionEvent]) -> list[CodeBlock]:
    """Summarize events into unique code blocks with total revision counts."""
    counts = Counter(ev.code_block_id for ev in events)
    return [CodeBlock(id=block, revision_count_total=n)
            for block, n in sorted(counts.items())]


def change_requests_to_jsonl(crs: Iterable[ChangeRequest]) -> bytes:
    lines = []
    for cr in crs:
        record: dict = {"id": cr.id, "short": cr.short_desc, "long": cr.long_desc}
        if cr.kind_hint is not None:
            record["kind_hint"] = cr.kind_hint
        if cr.ground_truth is not None:
            record["fault"] = cr.ground_truth
        lines.append(json.dumps(record))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def revisions_to_jsonl(events: Iterable[RevisionEvent]) -> bytes:
    lines = []
    for ev in events:
        record: dict = {"rev": ev.revision_id, "block": ev.code_block_id,
                        "ts": _instant_to_str(ev.timestamp), "msg": ev.message}
        if ev.linked_cr_ids:
            record["crs"] = list(ev.linked_cr_ids)
        lines.append(json.dumps(record))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
