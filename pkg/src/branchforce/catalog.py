"""Configurable catalog of injection-target APIs and evasion signals.

The catalog decides which calls mark a condition block for forcing.
Everything here is data; adding an API means editing a config file,
not code.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import taxonomy

BARE_CALL = "bare-call"
MEMBER_TERMINAL = "member-terminal"
CONSTRUCTOR = "constructor"

_MATCH_KINDS = (BARE_CALL, MEMBER_TERMINAL, CONSTRUCTOR)


@dataclass(frozen=True)
class ApiSignature:
    name: str
    match_kind: str

    def __post_init__(self):
        if self.match_kind not in _MATCH_KINDS:
            raise ValueError("Unknown match kind %r" % self.match_kind)


@dataclass(frozen=True)
class ApiCatalog:
    mode: str  # browser | npm
    injection_apis: frozenset[ApiSignature]
    evasion_apis: dict[str, frozenset[str]] = field(default_factory=dict)

    def bare_call_names(self) -> frozenset[str]:
        return frozenset(s.name for s in self.injection_apis if s.match_kind == BARE_CALL)

    def member_terminal_names(self) -> frozenset[str]:
        return frozenset(s.name for s in self.injection_apis if s.match_kind == MEMBER_TERMINAL)

    def constructor_names(self) -> frozenset[str]:
        return frozenset(s.name for s in self.injection_apis if s.match_kind == CONSTRUCTOR)


_BROWSER_SIGNATURES: tuple[tuple[str, str], ...] = (
    ("setTimeout", BARE_CALL),
    ("setInterval", BARE_CALL),
    ("fetch", BARE_CALL),
    ("eval", BARE_CALL),
    ("append", MEMBER_TERMINAL),
    ("prepend", MEMBER_TERMINAL),
    ("insertAfter", MEMBER_TERMINAL),
    ("insertBefore", MEMBER_TERMINAL),
    ("appendChild", MEMBER_TERMINAL),
    ("Function", CONSTRUCTOR),
)

# npm code reaches the exec family both destructured (`exec(...)`) and
# through the module object (`cp.exec(...)`), so both shapes are listed
_NPM_EXTRA_SIGNATURES: tuple[tuple[str, str], ...] = (
    ("exec", BARE_CALL),
    ("exec", MEMBER_TERMINAL),
    ("execFile", BARE_CALL),
    ("execFile", MEMBER_TERMINAL),
    ("execSync", BARE_CALL),
    ("execSync", MEMBER_TERMINAL),
    ("spawnSync", BARE_CALL),
    ("spawnSync", MEMBER_TERMINAL),
    ("urlopen", BARE_CALL),
)


def _default_evasion_apis(mode: str) -> dict[str, frozenset[str]]:
    return {c.name: frozenset(c.signals) for c in taxonomy.categories_for_mode(mode)}


def default_catalog(mode: str) -> ApiCatalog:
    if mode == "browser":
        pairs = _BROWSER_SIGNATURES
    elif mode == "npm":
        pairs = _BROWSER_SIGNATURES + _NPM_EXTRA_SIGNATURES
    else:
        raise ValueError("Unknown mode %r" % mode)
    sigs = frozenset(ApiSignature(name, kind) for name, kind in pairs)
    return ApiCatalog(mode=mode, injection_apis=sigs, evasion_apis=_default_evasion_apis(mode))


def load_catalog(path: str) -> ApiCatalog:
    """Read a catalog config: {"mode", "injection_apis", "evasion_apis"}."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return catalog_from_dict(doc)


def catalog_from_dict(doc: dict) -> ApiCatalog:
    mode = doc["mode"]
    if mode not in ("browser", "npm"):
        raise ValueError("Unknown mode %r" % mode)
    sigs = frozenset(
        ApiSignature(entry["name"], entry["match_kind"]) for entry in doc["injection_apis"]
    )
    evasion = {
        category: frozenset(str(t).lower() for t in terms)
        for category, terms in doc.get("evasion_apis", {}).items()
    }
    if not evasion:
        evasion = _default_evasion_apis(mode)
    return ApiCatalog(mode=mode, injection_apis=sigs, evasion_apis=evasion)


def catalog_to_dict(catalog: ApiCatalog) -> dict:
    return {
        "mode": catalog.mode,
        "injection_apis": [
            {"name": s.name, "match_kind": s.match_kind}
            for s in sorted(catalog.injection_apis, key=lambda s: (s.name, s.match_kind))
        ],
        "evasion_apis": {
            category: sorted(terms) for category, terms in sorted(catalog.evasion_apis.items())
        },
    }
