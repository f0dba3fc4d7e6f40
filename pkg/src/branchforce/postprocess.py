"""Decisions over completed run logs: flagging, category mapping, metrics.

Everything here is pure over finished RunLogs; nothing re-executes code.
The flag rule and the category signal sets are config-surfaced so that
deployments can tune them without touching this module.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .taxonomy import categories_for_mode, matching_categories
from .tracking import (
    ApiCallRecord,
    ChainStats,
    ForcedExecEvent,
    RunLog,
    chain_lengths,
    coverage_loc,
    is_third_party,
)

DEFAULT_FLAG_THRESHOLD = 5
DEFAULT_TIMEBOMB_FLOOR_MS = 60_000.0

_TIMER_APIS = ("setTimeout", "setInterval")
_NUMBER_TOKEN = re.compile(r"\d+(?:\.\d+)?")


@dataclass(frozen=True)
class FlagDecision:
    flagged: bool
    forced_exec_count: int
    third_party_injection_count: int
    threshold: int
    rationale: tuple[str, ...]


def flag(log: RunLog, threshold: int = DEFAULT_FLAG_THRESHOLD) -> FlagDecision:
    """Flag when enough conditions were forced AND outside code arrived."""
    injected = [r for r in log.scripts.values()
                if is_third_party(r.provenance, log.origin)]
    forced = log.forced_count
    flagged = forced >= threshold and len(injected) >= 1
    lines: list[str] = []
    if flagged:
        for event in log.events:
            lines.append("forced %s at %s:%d apis=%s" % (
                event.kind, event.script_id, event.line, ",".join(event.apis)))
        for record in injected:
            lines.append("third-party injection %s as %s" % (
                record.provenance.url, record.script_id))
    else:
        lines.append("forced executions: %d (threshold %d)" % (forced, threshold))
        lines.append("third-party injections: %d (need >= 1)" % len(injected))
    return FlagDecision(flagged, forced, len(injected), threshold, tuple(lines))


def _max_timer_delay(api_calls: Iterable[ApiCallRecord]) -> float:
    worst = 0.0
    for call in api_calls:
        if call.name not in _TIMER_APIS:
            continue
        for token in _NUMBER_TOKEN.findall(call.args):
            worst = max(worst, float(token))
    return worst


def classify_evasions(events: Iterable[ForcedExecEvent],
                      api_calls: Iterable[ApiCallRecord],
                      mode: str,
                      signal_sets: Optional[dict] = None,
                      commands: Iterable[str] = (),
                      timebomb_floor_ms: float = DEFAULT_TIMEBOMB_FLOOR_MS) -> set[str]:
    """Category names evidenced by the run.

    Guard-term matching carries most categories; three need extra context:
    timebombs (a forced timer with a big enough delay literal), server-side
    checks (a guard fed by fetched data), and the passwd/shadow probe (the
    command log, since the path shows up in a shell string, not a guard).
    """
    events = list(events)
    api_calls = list(api_calls)
    matched: set[str] = set()
    all_terms: set[str] = set()
    for event in events:
        matched |= matching_categories(event.guard_terms, mode, signal_sets)
        all_terms |= event.guard_terms

    if events and _max_timer_delay(api_calls) >= timebomb_floor_ms:
        term_blob = all_terms | {c.name.lower() for c in api_calls}
        if any("cookie" in t for t in term_blob):
            matched.add("cookie-timebomb")
        else:
            matched.add("localstorage-timebomb")

    if any(e.guard_fetch_tainted for e in events):
        matched.add("server-side")

    for cmd in commands:
        low = cmd.lower()
        if "passwd" in low or "shadow" in low:
            matched.add("password-path")
            break

    applicable = {c.name for c in categories_for_mode(mode)}
    return matched & applicable


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float

    def summary_line(self) -> str:
        return ("TP=%d FP=%d TN=%d FN=%d precision=%.2f recall=%.2f f1=%.2f"
                % (self.tp, self.fp, self.tn, self.fn,
                   self.precision, self.recall, self.f1))


def metrics_from_counts(tp: int, fp: int, tn: int, fn: int) -> Metrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(tp, fp, tn, fn, precision, recall, f1)


def compute_metrics(decisions: dict, labels: dict) -> Metrics:
    if set(decisions) != set(labels):
        raise ValueError("decision/label key sets differ: %r vs %r"
                         % (sorted(set(decisions) ^ set(labels))[:5], len(labels)))
    tp = fp = tn = fn = 0
    for sample_id, decided in decisions.items():
        truth = labels[sample_id]
        if decided and truth:
            tp += 1
        elif decided and not truth:
            fp += 1
        elif not decided and truth:
            fn += 1
        else:
            tn += 1
    return metrics_from_counts(tp, fp, tn, fn)


@dataclass
class SampleReport:
    sample_id: str
    mode: str
    forced_exec_count: int
    third_party_injection_count: int
    chain_histogram: dict[int, int]
    chain_average: float
    chain_max: int
    coverage_forced: int
    coverage_baseline: Optional[int]
    evasion_categories: tuple[str, ...]
    flagged: bool
    rationale: tuple[str, ...]
    label: Optional[str] = None
    errors: tuple[str, ...] = ()
    depth_skips: int = 0

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "mode": self.mode,
            "forced_exec_count": self.forced_exec_count,
            "third_party_injection_count": self.third_party_injection_count,
            "chain_histogram": {str(k): v for k, v in sorted(self.chain_histogram.items())},
            "chain_average": self.chain_average,
            "chain_max": self.chain_max,
            "coverage_forced": self.coverage_forced,
            "coverage_baseline": self.coverage_baseline,
            "evasion_categories": list(self.evasion_categories),
            "flagged": self.flagged,
            "rationale": list(self.rationale),
            "label": self.label,
            "errors": list(self.errors),
            "depth_skips": self.depth_skips,
        }


def build_report(sample_id: str, mode: str, log: RunLog,
                 baseline_log: Optional[RunLog] = None,
                 threshold: int = DEFAULT_FLAG_THRESHOLD,
                 signal_sets: Optional[dict] = None,
                 timebomb_floor_ms: float = DEFAULT_TIMEBOMB_FLOOR_MS,
                 label: Optional[str] = None,
                 errors: Iterable[str] = (),
                 depth_skips: int = 0) -> SampleReport:
    decision = flag(log, threshold)
    stats: ChainStats = chain_lengths(log.scripts)
    categories = classify_evasions(log.events, log.api_calls, mode,
                                   signal_sets=signal_sets,
                                   commands=log.commands,
                                   timebomb_floor_ms=timebomb_floor_ms)
    return SampleReport(
        sample_id=sample_id,
        mode=mode,
        forced_exec_count=decision.forced_exec_count,
        third_party_injection_count=decision.third_party_injection_count,
        chain_histogram=dict(stats.histogram),
        chain_average=stats.average,
        chain_max=stats.max_length,
        coverage_forced=coverage_loc(log.scripts.values()),
        coverage_baseline=(coverage_loc(baseline_log.scripts.values())
                           if baseline_log is not None else None),
        evasion_categories=tuple(sorted(categories)),
        flagged=decision.flagged,
        rationale=decision.rationale,
        label=label,
        errors=tuple(errors),
        depth_skips=depth_skips,
    )
