"""Evasion category taxonomy and guard-term extraction.

Each category carries the environment modes it applies to and a set of
lowercase signal terms. A signal matches when it occurs as a substring
of any term extracted from the code under inspection (identifier names,
dotted member chains, string literals). Signal sets are data: a catalog
config file can replace them without code changes.
"""
from __future__ import annotations

from dataclasses import dataclass

from .frontend import AstNode, NodeKind, iter_tree


@dataclass(frozen=True)
class EvasionCategory:
    number: int  # stable 1-based index; bit index = number - 1
    name: str
    group: str
    browser: bool
    npm: bool
    signals: tuple[str, ...]


CATEGORIES: tuple[EvasionCategory, ...] = (
    EvasionCategory(1, "email-login", "Login", True, True,
                    ("email", "isloggedin", "signin")),
    EvasionCategory(2, "social-media-signup", "Login", True, True,
                    ("socialsignup", "facebook", "twitter", "google")),
    EvasionCategory(3, "crypto-wallet-login", "Login", True, True,
                    ("jscrypto", "wallet", "metamask", ".connected")),
    EvasionCategory(4, "localstorage-timebomb", "Timebombs", True, True,
                    ("storage.set", "storage.get", "localstorage", "chrome.storage")),
    EvasionCategory(5, "cookie-timebomb", "Timebombs", True, True,
                    ("cookies.set", "cookies.get", "browser.cookies", "cookie")),
    EvasionCategory(6, "country-check", "Fingerprint", True, False,
                    ("country", "geolocation", "timezone")),
    EvasionCategory(7, "window-size", "Fingerprint", True, False,
                    ("window.height", "window.width", "innerwidth", "innerheight")),
    EvasionCategory(8, "browser-type", "Fingerprint", True, False,
                    ("navigator.useragent", "ischrome", "isfirefox", "useragent")),
    EvasionCategory(9, "os-check", "Fingerprint", True, False,
                    ("navigator.platform", "appversion", "oscpu")),
    EvasionCategory(10, "open-devtools", "Fingerprint", True, False,
                    ("devtools",)),
    EvasionCategory(11, "visitor-id", "Fingerprint", True, False,
                    ("visitorid",)),
    EvasionCategory(12, "recaptcha", "Fingerprint", True, False,
                    ("recaptcha", "captcha")),
    EvasionCategory(13, "microphone", "Fingerprint", True, False,
                    ("getusermedia", "audiocontext")),
    EvasionCategory(14, "phone-type", "Fingerprint", True, False,
                    ("android", "iphone", "ismobile")),
    EvasionCategory(15, "key-presses", "User Interaction", True, False,
                    ("keyup", "keydown", "keypress")),
    EvasionCategory(16, "multiple-keys", "User Interaction", True, False,
                    ("keycount", "keybuffer", "multiplekeys")),
    EvasionCategory(17, "mouse-clicks", "User Interaction", True, False,
                    ("click", "mousedown")),
    EvasionCategory(18, "notification-settings", "User Interaction", True, True,
                    ("notification",)),
    EvasionCategory(19, "blocked-websites", "Website Check", True, False,
                    ("blocked", "blacklist", "blocklist")),
    EvasionCategory(20, "dom-check", "Website Check", True, False,
                    ("hasclass", "queryselector", "getelementbyid")),
    EvasionCategory(21, "random-value", "Other", True, True,
                    ("math.random", "random")),
    EvasionCategory(22, "server-side", "Other", True, True,
                    ("serverside",)),
    EvasionCategory(23, "generic-bot", "Other", True, False,
                    ("webdriver", "headless", "selenium", "phantom")),
    EvasionCategory(24, "password-path", "Other", False, True,
                    ("passwd", "shadow")),
    EvasionCategory(25, "ip-port", "Other", False, True,
                    ("ipport", "ip_port", "ip:port")),
    EvasionCategory(26, "runs-in-browser", "Other", False, True,
                    ("window", "document", "browser")),
    EvasionCategory(27, "wx-permission", "Other", False, True,
                    ("w_ok", "x_ok", "chmod", "fs.access")),
    EvasionCategory(28, "local-config", "Other", False, True,
                    (".npmrc", ".env", "config")),
)

TAXONOMY_SIZE = len(CATEGORIES)

_BY_NAME = {c.name: c for c in CATEGORIES}


def by_name(name: str) -> EvasionCategory:
    return _BY_NAME[name]


def categories_for_mode(mode: str) -> tuple[EvasionCategory, ...]:
    if mode == "browser":
        return tuple(c for c in CATEGORIES if c.browser)
    if mode == "npm":
        return tuple(c for c in CATEGORIES if c.npm)
    raise ValueError("Unknown mode %r" % mode)


def member_chain(node: AstNode) -> str | None:
    """Dotted path of a member chain rooted at an identifier, or None.

    Computed segments are included when their index is a string literal
    (`a['b'].c` -> "a.b.c"); any other shape breaks the chain.
    """
    parts: list[str] = []
    while node.kind is NodeKind.MEMBER_ACCESS:
        if not node.payload["computed"]:
            parts.append(node.payload["name"])
        else:
            index = node.children[1]
            if index.kind is NodeKind.LITERAL and index.payload["kind"] == "string":
                parts.append(index.payload["value"])
            else:
                return None
        node = node.children[0]
    if node.kind is not NodeKind.IDENTIFIER:
        return None
    parts.append(node.payload["name"])
    return ".".join(reversed(parts))


def collect_terms(root: AstNode) -> set[str]:
    """Lowercased matchable terms of a subtree.

    Identifiers, member property names, full dotted member chains, and
    string literal values all count as terms.
    """
    terms: set[str] = set()
    for node in iter_tree(root):
        kind = node.kind
        if kind is NodeKind.IDENTIFIER:
            terms.add(node.payload["name"].lower())
        elif kind is NodeKind.MEMBER_ACCESS:
            name = node.payload.get("name")
            if name:
                terms.add(name.lower())
            chain = member_chain(node)
            if chain:
                terms.add(chain.lower())
        elif kind is NodeKind.LITERAL and node.payload["kind"] == "string":
            terms.add(node.payload["value"].lower())
    return terms


def signals_match(terms: set[str], signals: tuple[str, ...]) -> bool:
    """True when any signal occurs as a substring of any term."""
    return any(signal in term for term in terms for signal in signals)


def matching_categories(terms: set[str], mode: str,
                        signal_sets: dict[str, frozenset[str]] | None = None) -> set[str]:
    """Names of mode-applicable categories whose signals match `terms`.

    `signal_sets` overrides the built-in signals per category name
    (catalog config); categories absent from the override keep defaults.
    """
    matched = set()
    for category in categories_for_mode(mode):
        signals: tuple[str, ...] = category.signals
        if signal_sets is not None and category.name in signal_sets:
            signals = tuple(signal_sets[category.name])
        if signals_match(terms, signals):
            matched.add(category.name)
    return matched
