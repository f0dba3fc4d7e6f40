"""Provenance records, API/forced-event logs, chain stats, and coverage.

One RunLog instance belongs to one analysis job. Scripts get ids in spawn
order ("s0", "s1", ...; a context prefix like "c1." is added when several
page contexts feed a single sample). The emitted JSONL stream is the
chronological event stream followed by one line per script, sorted by id,
and is byte-identical across repeated runs of the same inputs.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union


@dataclass(frozen=True)
class Root:
    path: str


@dataclass(frozen=True)
class Eval:
    parent_id: str


@dataclass(frozen=True)
class Injected:
    parent_id: str
    url: str


@dataclass(frozen=True)
class Local:
    parent_id: str
    path: str


Provenance = Union[Root, Eval, Injected, Local]


def is_third_party(provenance: Provenance, origin: str) -> bool:
    """Injected from a URL outside the sample's own origin prefix."""
    return isinstance(provenance, Injected) and not provenance.url.startswith(origin)


def provenance_to_json(provenance: Provenance) -> dict:
    if isinstance(provenance, Root):
        return {"kind": "root", "path": provenance.path}
    if isinstance(provenance, Eval):
        return {"kind": "eval", "parent": provenance.parent_id}
    if isinstance(provenance, Injected):
        return {"kind": "injected", "parent": provenance.parent_id, "url": provenance.url}
    return {"kind": "local", "parent": provenance.parent_id, "path": provenance.path}


@dataclass
class BranchOutcome:
    branch: str                      # "consequent", "alternate", "body", "case2", ...
    executed_in: str                 # "live" | "clone"
    threw: Optional[str] = None      # clone errors are captured, never propagated
    lines: set[int] = field(default_factory=set)


@dataclass
class ScriptRecord:
    script_id: str
    provenance: Provenance
    line_count: int
    executed_lines: set[int] = field(default_factory=set)
    children: list[str] = field(default_factory=list)
    parse_failed: bool = False
    error: Optional[str] = None


@dataclass
class ApiCallRecord:
    script_id: str
    name: str
    args: str
    line: int


@dataclass
class ForcedExecEvent:
    script_id: str
    line: int
    kind: str
    apis: tuple[str, ...]            # sorted catalog API names that marked the block
    guard: str                       # observed guard value, summarized
    branches: list[BranchOutcome] = field(default_factory=list)
    guard_terms: frozenset[str] = frozenset()
    guard_fetch_tainted: bool = False


ARG_BYTE_CAP = 256


def truncate_summary(text: str, cap: int = ARG_BYTE_CAP) -> str:
    raw = text.encode("utf-8")
    if len(raw) <= cap:
        return text
    return raw[:cap].decode("utf-8", errors="ignore")


_ID_RE = re.compile(r"^(?:c(\d+)\.)?s(\d+)$")


def script_id_sort_key(script_id: str) -> tuple[int, int]:
    m = _ID_RE.match(script_id)
    if m is None:
        return (1 << 30, 1 << 30)
    return (int(m.group(1) or 0), int(m.group(2)))


class RunLog:
    """Append-only sink for everything one job observes."""

    def __init__(self, origin: str, id_prefix: str = "") -> None:
        self.origin = origin
        self.id_prefix = id_prefix
        self.scripts: dict[str, ScriptRecord] = {}
        self.events: list[ForcedExecEvent] = []
        self.api_calls: list[ApiCallRecord] = []
        self.resources_404: list[str] = []
        self.commands: list[str] = []
        self._stream: list[tuple[str, object]] = []
        self._next_script = 0

    def new_script(self, provenance: Provenance, line_count: int) -> ScriptRecord:
        script_id = "%ss%d" % (self.id_prefix, self._next_script)
        self._next_script += 1
        record = ScriptRecord(script_id, provenance, line_count)
        self.scripts[script_id] = record
        return record

    def log_api(self, script_id: str, name: str, args: str, line: int) -> ApiCallRecord:
        record = ApiCallRecord(script_id, name, truncate_summary(args), line)
        self.api_calls.append(record)
        self._stream.append(("api", record))
        return record

    def log_forced(self, event: ForcedExecEvent) -> None:
        self.events.append(event)
        self._stream.append(("forced", event))

    def log_resource_404(self, url: str) -> None:
        self.resources_404.append(url)
        self._stream.append(("resource404", url))

    def log_command(self, cmd: str) -> None:
        self.commands.append(cmd)
        self._stream.append(("command", cmd))

    @property
    def forced_count(self) -> int:
        return len(self.events)

    @property
    def third_party_injection_count(self) -> int:
        return sum(
            1 for r in self.scripts.values() if is_third_party(r.provenance, self.origin)
        )

    def absorb(self, other: "RunLog") -> None:
        """Merge a completed log (one context) into this aggregate."""
        for script_id, record in other.scripts.items():
            if script_id in self.scripts:
                raise ValueError("duplicate script id %r in merge" % script_id)
            self.scripts[script_id] = record
        self.events.extend(other.events)
        self.api_calls.extend(other.api_calls)
        self.resources_404.extend(other.resources_404)
        self.commands.extend(other.commands)
        self._stream.extend(other._stream)


@dataclass(frozen=True)
class ChainStats:
    histogram: dict[int, int]        # histogram[k] = maximal paths of length >= k
    average: float                   # mean maximal root-to-leaf path length
    max_length: int
    script_count: int


def _chain_children(record: ScriptRecord, scripts: dict[str, ScriptRecord]) -> list[ScriptRecord]:
    # only dynamic code loading lengthens a chain; modules pulled from the
    # sample's own files (Local) do not
    out = []
    for child_id in record.children:
        child = scripts.get(child_id)
        if child is not None and isinstance(child.provenance, (Injected, Eval)):
            out.append(child)
    return out


def chain_paths(scripts: dict[str, ScriptRecord]) -> list[int]:
    """Lengths of all maximal root-to-leaf paths through injection edges."""
    roots = [r for r in scripts.values() if isinstance(r.provenance, Root)]
    lengths: list[int] = []

    def walk(record: ScriptRecord, depth: int) -> None:
        nxt = _chain_children(record, scripts)
        if not nxt:
            lengths.append(depth)
            return
        for child in nxt:
            walk(child, depth + 1)

    for root in roots:
        walk(root, 1)
    return lengths


def chain_lengths(scripts: dict[str, ScriptRecord]) -> ChainStats:
    lengths = chain_paths(scripts)
    histogram: dict[int, int] = {}
    for length in lengths:
        for k in range(1, length + 1):
            histogram[k] = histogram.get(k, 0) + 1
    average = sum(lengths) / len(lengths) if lengths else 0.0
    return ChainStats(
        histogram=histogram,
        average=average,
        max_length=max(lengths) if lengths else 0,
        script_count=len(scripts),
    )


def coverage_loc(scripts: Iterable[ScriptRecord]) -> int:
    return sum(len(r.executed_lines) for r in scripts)


def script_key(record: ScriptRecord, scripts: dict[str, ScriptRecord]) -> tuple:
    """Spawn-order-independent identity: the provenance path from the root.

    Script ids shift between runs that spawn different script sets (a
    baseline run skips timers, a forced run adds clone spawns), so
    cross-run line comparisons key on this instead.
    """
    steps: list[tuple] = []
    cur: Optional[ScriptRecord] = record
    while cur is not None:
        prov = cur.provenance
        if isinstance(prov, Root):
            steps.append(("root", prov.path))
            break
        if isinstance(prov, Injected):
            steps.append(("injected", prov.url))
        elif isinstance(prov, Local):
            steps.append(("local", prov.path))
        else:
            steps.append(("eval", cur.line_count))
        cur = scripts.get(prov.parent_id)
    return tuple(reversed(steps))


def executed_line_keys(log: "RunLog") -> set[tuple]:
    """(script key, line) pairs for every executed line in the log."""
    keys: set[tuple] = set()
    for record in log.scripts.values():
        key = script_key(record, log.scripts)
        for line in record.executed_lines:
            keys.add((key, line))
    return keys


def _stream_line(entry_type: str, payload: object) -> dict:
    if entry_type == "api":
        api = payload
        return {"t": "api", "id": api.script_id, "name": api.name,
                "args": api.args, "line": api.line}
    if entry_type == "forced":
        ev = payload
        return {"t": "forced", "id": ev.script_id, "kind": ev.kind,
                "apis": list(ev.apis), "guard": ev.guard, "line": ev.line}
    if entry_type == "resource404":
        return {"t": "resource404", "url": payload}
    if entry_type == "command":
        return {"t": "command", "cmd": payload}
    raise ValueError("unknown stream entry %r" % entry_type)


def emit_log(log: RunLog, sink: IO[str]) -> None:
    """Write the frozen JSONL surface: event stream, then script records."""
    for entry_type, payload in log._stream:
        sink.write(json.dumps(_stream_line(entry_type, payload)) + "\n")
    for script_id in sorted(log.scripts, key=script_id_sort_key):
        record = log.scripts[script_id]
        line = {
            "t": "script",
            "id": record.script_id,
            "prov": provenance_to_json(record.provenance),
            "lines": sorted(record.executed_lines),
        }
        sink.write(json.dumps(line) + "\n")


def emit_log_text(log: RunLog) -> str:
    import io

    buf = io.StringIO()
    emit_log(log, buf)
    return buf.getvalue()
