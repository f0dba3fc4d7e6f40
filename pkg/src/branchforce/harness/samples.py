"""Sample ingestion and the static prefilter.

A sample is whatever unit lands in the queue: a bare script file, an
unpacked browser extension, or an npm package directory. Ingestion
normalizes each into entry-point sources plus side-channel facts
(manifest grants, package commands) without ever running anything.
"""
from __future__ import annotations

import json
import pathlib
import re
from dataclasses import dataclass, field
from typing import Optional

from ..catalog import ApiCatalog, default_catalog
from ..frontend import LexError, ParseError, UnsupportedSyntax, parse
from ..scanner import program_injection_apis

KINDS = ("script", "extension", "npm")

# manifest match patterns that mean "runs everywhere"
ALL_URL_PATTERNS = ("<all_urls>", "*://*/*", "http://*/*", "https://*/*")

_NODE_COMMAND = re.compile(r"^node\s+(?:\./)?([\w./-]+\.c?js)\s*$")


class IngestError(Exception):
    """The sample directory does not have the shape its kind promises."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__("%s: %s" % (path, reason))
        self.path = path
        self.reason = reason


@dataclass
class EntryFile:
    path: str   # sample-relative name, used for provenance
    text: str


@dataclass
class Sample:
    sample_id: str
    kind: str
    entries: list[EntryFile]
    # package commands recorded for the log, never executed
    commands: tuple[str, ...] = ()
    # resolver fixture doc ({"resources": ..., "commands": ...}) shipped
    # alongside generated samples so runs are reproducible offline
    resources: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    label: Optional[str] = None

    @property
    def mode(self) -> str:
        return "npm" if self.kind == "npm" else "browser"


def _read_text(path: pathlib.Path, sample_path: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise IngestError(sample_path, "entry point %s does not exist" % path.name)
    except OSError as exc:
        raise IngestError(sample_path, "cannot read %s: %s" % (path.name, exc))


def _optional_json(path: pathlib.Path) -> dict:
    if not path.is_file():
        return {}
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return {}
    return doc if isinstance(doc, dict) else {}


def _ingest_script(path: pathlib.Path) -> Sample:
    if not path.is_file():
        raise IngestError(str(path), "script sample must be a single file")
    meta = _optional_json(path.with_suffix(".meta.json"))
    return Sample(
        sample_id=path.stem,
        kind="script",
        entries=[EntryFile(path.name, _read_text(path, str(path)))],
        resources=_optional_json(path.with_suffix(".resources.json")),
        metadata=meta,
        label=meta.get("label"),
    )


def _manifest_all_urls(manifest: dict) -> bool:
    grants: list[str] = []
    for entry in manifest.get("content_scripts") or []:
        if isinstance(entry, dict):
            grants.extend(entry.get("matches") or [])
    for key in ("permissions", "host_permissions"):
        grants.extend(p for p in manifest.get(key) or [] if isinstance(p, str))
    return any(g in ALL_URL_PATTERNS for g in grants)


def _manifest_entry_names(manifest: dict, sample_path: str) -> list[str]:
    names: list[str] = []
    for entry in manifest.get("content_scripts") or []:
        if isinstance(entry, dict):
            names.extend(entry.get("js") or [])
    background = manifest.get("background") or {}
    if isinstance(background, dict):
        worker = background.get("service_worker")
        if worker:
            names.append(worker)
        names.extend(background.get("scripts") or [])
    if not all(isinstance(n, str) for n in names):
        raise IngestError(sample_path, "manifest names a non-string entry point")
    seen: set[str] = set()
    ordered = []
    for name in names:
        if name not in seen:
            seen.add(name)
            ordered.append(name)
    return ordered


def _ingest_extension(path: pathlib.Path) -> Sample:
    sample_path = str(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise IngestError(sample_path, "extension sample has no manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IngestError(sample_path, "unreadable manifest.json: %s" % exc)
    if not isinstance(manifest, dict):
        raise IngestError(sample_path, "manifest.json is not an object")

    names = _manifest_entry_names(manifest, sample_path)
    if not names:
        raise IngestError(sample_path, "manifest names no scripts")
    entries = [EntryFile(name, _read_text(path / name, sample_path)) for name in names]
    meta = _optional_json(path / "meta.json")
    meta["all_urls"] = _manifest_all_urls(manifest)
    return Sample(
        sample_id=path.name,
        kind="extension",
        entries=entries,
        resources=_optional_json(path / "resources.json"),
        metadata=meta,
        label=meta.get("label"),
    )


def _ingest_npm(path: pathlib.Path) -> Sample:
    sample_path = str(path)
    package_path = path / "package.json"
    if not package_path.is_file():
        raise IngestError(sample_path, "npm sample has no package.json")
    try:
        package = json.loads(package_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IngestError(sample_path, "unreadable package.json: %s" % exc)
    if not isinstance(package, dict):
        raise IngestError(sample_path, "package.json is not an object")

    entries: list[EntryFile] = []
    commands: list[str] = []
    seen_files: set[str] = set()
    scripts = package.get("scripts") or {}
    if not isinstance(scripts, dict):
        raise IngestError(sample_path, "package scripts table is not an object")
    for _name, command in scripts.items():
        if not isinstance(command, str):
            continue
        node = _NODE_COMMAND.match(command.strip())
        if node:
            filename = node.group(1)
            if filename not in seen_files:
                seen_files.add(filename)
                entries.append(EntryFile(filename, _read_text(path / filename, sample_path)))
        else:
            # recorded verbatim for the command log; never executed
            commands.append(command)

    meta = _optional_json(path / "meta.json")
    return Sample(
        sample_id=package.get("name") or path.name,
        kind="npm",
        entries=entries,
        commands=tuple(commands),
        resources=_optional_json(path / "resources.json"),
        metadata=meta,
        label=meta.get("label"),
    )


def ingest(path: str, kind: str) -> Sample:
    if kind not in KINDS:
        raise ValueError("kind must be one of %s, got %r" % (", ".join(KINDS), kind))
    p = pathlib.Path(path)
    if kind == "script":
        return _ingest_script(p)
    if not p.is_dir():
        raise IngestError(str(p), "%s sample must be a directory" % kind)
    if kind == "extension":
        return _ingest_extension(p)
    return _ingest_npm(p)


def ingest_dir(path: str, kind: str) -> list[Sample]:
    """Every sample of one kind under a corpus directory, sorted by id."""
    p = pathlib.Path(path)
    if kind == "script":
        candidates = sorted(q for q in p.iterdir() if q.suffix == ".js")
    else:
        marker = "manifest.json" if kind == "extension" else "package.json"
        candidates = sorted(q for q in p.iterdir() if (q / marker).is_file())
    return [ingest(str(q), kind) for q in candidates]


@dataclass(frozen=True)
class PrefilterDecision:
    sample_id: str
    kept: bool
    reason: str


def prefilter(samples: list[Sample],
              catalog: Optional[ApiCatalog] = None) -> tuple[list[Sample], list[PrefilterDecision]]:
    """Cheap static cut before any execution.

    A sample survives iff its manifest grants all-URLs access (extension
    kind only) or some entry point statically mentions at least one
    catalog injection API. Everything else is dropped with a reason.
    """
    kept: list[Sample] = []
    decisions: list[PrefilterDecision] = []
    for sample in samples:
        cat = catalog if catalog is not None else default_catalog(sample.mode)
        if sample.kind == "extension" and sample.metadata.get("all_urls"):
            kept.append(sample)
            decisions.append(PrefilterDecision(sample.sample_id, True,
                                               "manifest grants all-URLs"))
            continue
        names: set[str] = set()
        unparsed: list[str] = []
        for entry in sample.entries:
            try:
                program = parse(entry.text)
            except (LexError, ParseError, UnsupportedSyntax):
                unparsed.append(entry.path)
                continue
            names |= {sig.name for sig in program_injection_apis(program, cat)}
        if names:
            kept.append(sample)
            decisions.append(PrefilterDecision(
                sample.sample_id, True,
                "static injection APIs: %s" % ", ".join(sorted(names))))
        else:
            reason = "no all-URLs grant and no catalog injection APIs"
            if unparsed:
                reason += " (unparsed: %s)" % ", ".join(unparsed)
            decisions.append(PrefilterDecision(sample.sample_id, False, reason))
    return kept, decisions
