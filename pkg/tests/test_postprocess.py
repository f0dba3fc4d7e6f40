"""Flag rule, category mapping, and metric formulas.

The metric oracle recounts confusion cells with collections.Counter and
checks ratios with exact fractions, sharing no code with the module under
test. Frozen metric values are the outputs for the counts 420/13/487/80.
"""
import os
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from branchforce.frontend import parse
from branchforce.postprocess import (
    DEFAULT_TIMEBOMB_FLOOR_MS,
    FlagDecision,
    classify_evasions,
    compute_metrics,
    build_report,
    flag,
    metrics_from_counts,
)
from branchforce.runtime import HostWorld, Interpreter, ResourceResolver
from branchforce.scanner import find_condition_nodes, guard_expression
from branchforce.taxonomy import collect_terms
from branchforce.tracking import (
    ApiCallRecord,
    ForcedExecEvent,
    Injected,
    Root,
    RunLog,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


# -- oracles ---------------------------------------------------------------------


def oracle_metrics(decisions, labels):
    cells = Counter((decisions[k], labels[k]) for k in decisions)
    tp = cells[(True, True)]
    fp = cells[(True, False)]
    tn = cells[(False, False)]
    fn = cells[(False, True)]
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else Fraction(0))
    return tp, fp, tn, fn, precision, recall, f1


def make_event(guard_terms=(), kind="IfStatement", script_id="s0",
               line=1, tainted=False):
    return ForcedExecEvent(script_id=script_id, line=line, kind=kind,
                           apis=("eval",), guard="false",
                           guard_terms=frozenset(t.lower() for t in guard_terms),
                           guard_fetch_tainted=tainted)


def make_log(forced=0, external=0, local=0):
    log = RunLog("ext://sample/")
    root = log.new_script(Root("input.js"), 10)
    for i in range(forced):
        log.log_forced(make_event(script_id=root.script_id, line=i + 1))
    for i in range(external):
        log.new_script(Injected(root.script_id, "https://third.example/p%d.js" % i), 1)
    for i in range(local):
        log.new_script(Injected(root.script_id, "ext://sample/own%d.js" % i), 1)
    return log


# -- metrics -----------------------------------------------------------------------


def test_metrics_frozen_table():
    m = metrics_from_counts(420, 13, 487, 80)
    assert round(m.precision, 2) == 0.97
    assert round(m.recall, 2) == 0.84
    assert round(m.f1, 2) == 0.90
    assert "precision=0.97 recall=0.84 f1=0.90" in m.summary_line()


def test_metrics_all_correct_toy_set():
    decisions = {"a": True, "b": True, "c": False, "d": False}
    labels = dict(decisions)
    m = compute_metrics(decisions, labels)
    assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)
    assert (m.tp, m.fp, m.tn, m.fn) == (2, 0, 2, 0)


def test_metrics_zero_division_cases():
    none_decided = metrics_from_counts(0, 0, 5, 5)
    assert none_decided.precision == 0.0 and none_decided.f1 == 0.0
    no_positives = metrics_from_counts(0, 3, 5, 0)
    assert no_positives.recall == 0.0
    empty = metrics_from_counts(0, 0, 0, 0)
    assert (empty.precision, empty.recall, empty.f1) == (0.0, 0.0, 0.0)


@given(st.dictionaries(st.integers(0, 60),
                       st.tuples(st.booleans(), st.booleans()),
                       min_size=1, max_size=50))
def test_metrics_match_independent_oracle(table):
    decisions = {k: d for k, (d, _) in table.items()}
    labels = {k: t for k, (_, t) in table.items()}
    m = compute_metrics(decisions, labels)
    tp, fp, tn, fn, precision, recall, f1 = oracle_metrics(decisions, labels)
    assert (m.tp, m.fp, m.tn, m.fn) == (tp, fp, tn, fn)
    assert m.precision == pytest.approx(float(precision), abs=1e-12)
    assert m.recall == pytest.approx(float(recall), abs=1e-12)
    assert m.f1 == pytest.approx(float(f1), abs=1e-12)


def test_metrics_rejects_mismatched_keys():
    with pytest.raises(ValueError):
        compute_metrics({"a": True}, {"b": True})


# -- flag rule ---------------------------------------------------------------------


def test_flag_boundary_below_at_and_local_only():
    below = flag(make_log(forced=4, external=1))
    assert not below.flagged
    at = flag(make_log(forced=5, external=1))
    assert at.flagged
    local_only = flag(make_log(forced=9, external=0, local=3))
    assert not local_only.flagged
    assert local_only.third_party_injection_count == 0


def test_flag_rationale_lists_qualifying_events():
    decision = flag(make_log(forced=5, external=2))
    assert decision.flagged
    forced_lines = [l for l in decision.rationale if l.startswith("forced ")]
    injection_lines = [l for l in decision.rationale if "third-party injection" in l]
    assert len(forced_lines) == 5
    assert len(injection_lines) == 2
    miss = flag(make_log(forced=2, external=1))
    assert any("threshold" in l for l in miss.rationale)


def test_flag_monotonicity():
    def verdict(forced, external):
        return flag(make_log(forced=forced, external=external)).flagged
    for forced in range(0, 8):
        for external in range(0, 3):
            if verdict(forced, external):
                assert verdict(forced + 1, external)
                assert verdict(forced, external + 1)


def test_flag_threshold_is_configurable():
    log = make_log(forced=2, external=1)
    assert not flag(log).flagged
    assert flag(log, threshold=2).flagged


# -- category classification --------------------------------------------------------


def test_listing3_guard_classifies_blocked_websites():
    with open(os.path.join(FIXTURES, "listing3_blocked_sites.js")) as fh:
        program = parse(fh.read())
    guards = [guard_expression(c) for c in find_condition_nodes(program)
              if c.span.start_line == 15 and guard_expression(c) is not None]
    assert guards, "expected a condition on line 15"
    terms = set()
    for g in guards:
        terms |= collect_terms(g)
    event = make_event(guard_terms=terms, line=15)
    got = classify_evasions([event], [], "browser")
    assert got == {"blocked-websites"}


def test_unmatched_guard_maps_to_no_category():
    event = make_event(guard_terms={"x", "tmp", "count"})
    assert classify_evasions([event], [], "browser") == set()


def test_long_timer_defaults_to_storage_timebomb():
    timer = ApiCallRecord("s0", "setTimeout", "function <anon>, 93445000", 3)
    got = classify_evasions([make_event(guard_terms={"seen"})], [timer], "browser")
    assert "localstorage-timebomb" in got
    assert "cookie-timebomb" not in got


def test_long_timer_with_cookie_terms_routes_to_cookie_timebomb():
    timer = ApiCallRecord("s0", "setInterval", "function <anon>, 86400000", 2)
    event = make_event(guard_terms={"document.cookie", "cookie"})
    got = classify_evasions([event], [timer], "browser")
    assert "cookie-timebomb" in got
    assert "localstorage-timebomb" not in got


def test_short_timer_is_not_a_timebomb():
    timer = ApiCallRecord("s0", "setTimeout", "function <anon>, 59999", 1)
    got = classify_evasions([make_event(guard_terms={"seen"})], [timer], "browser")
    assert "localstorage-timebomb" not in got
    assert "cookie-timebomb" not in got
    floor_hit = classify_evasions([make_event(guard_terms={"seen"})], [
        ApiCallRecord("s0", "setTimeout", "function <anon>, %d" %
                      int(DEFAULT_TIMEBOMB_FLOOR_MS), 1)], "browser")
    assert "localstorage-timebomb" in floor_hit


def test_timer_without_forced_event_is_not_classified():
    timer = ApiCallRecord("s0", "setTimeout", "function <anon>, 93445000", 1)
    assert classify_evasions([], [timer], "browser") == set()


def test_fetch_tainted_guard_marks_server_side():
    tainted = make_event(guard_terms={"isdev"}, tainted=True)
    assert "server-side" in classify_evasions([tainted], [], "browser")
    plain = make_event(guard_terms={"isdev"}, tainted=False)
    assert "server-side" not in classify_evasions([plain], [], "browser")


def test_passwd_command_marks_password_path_in_npm_only():
    commands = ["test -f /etc/passwd ; echo $?"]
    assert "password-path" in classify_evasions([], [], "npm", commands=commands)
    assert "password-path" not in classify_evasions([], [], "browser",
                                                    commands=commands)


def test_npm_only_window_check_filtered_in_browser_mode():
    event = make_event(guard_terms={"window"})
    in_npm = classify_evasions([event], [], "npm")
    in_browser = classify_evasions([event], [], "browser")
    assert "runs-in-browser" in in_npm
    assert "runs-in-browser" not in in_browser
    # bare "window" must not satisfy the window-size fingerprint signals
    assert "window-size" not in in_browser


def test_signal_set_override_replaces_defaults():
    event = make_event(guard_terms={"zzmarker"})
    override = {"email-login": frozenset(["zzmarker"])}
    got = classify_evasions([event], [], "browser", signal_sets=override)
    assert "email-login" in got
    email_event = make_event(guard_terms={"email"})
    got2 = classify_evasions([email_event], [], "browser", signal_sets=override)
    assert "email-login" not in got2


# -- report assembly -----------------------------------------------------------------


def run_sample(src, mode="browser", resources=None, force=True, fire_timers=True):
    world = HostWorld(mode, resolver=ResourceResolver(resources),
                      fire_timers=fire_timers)
    Interpreter(world, force=force).run(src)
    return world


def test_build_report_fields_are_consistent():
    src = "if (localStorage.getItem('seen')) { eval('1;'); }"
    world = run_sample(src)
    baseline = run_sample(src, force=False, fire_timers=False)
    report = build_report("sample-1", "browser", world.log,
                          baseline_log=baseline.log)
    assert report.sample_id == "sample-1"
    assert report.forced_exec_count == len(world.log.events) == 1
    assert report.third_party_injection_count == 0
    assert not report.flagged
    assert report.coverage_forced >= report.coverage_baseline > 0
    # the forced clone's eval spawns a real child, so the chain is 2 deep
    assert report.chain_histogram == {1: 1, 2: 1}
    assert "localstorage-timebomb" in report.evasion_categories
    payload = report.to_json()
    assert payload["chain_histogram"] == {"1": 1, "2": 1}
    assert payload["flagged"] is False


def test_report_flag_invariant_on_flagged_sample():
    resources = {"https://feed.example/p.js": ("script", "var p = 1;")}
    src = "\n".join(
        ["if (document.hidden) { eval('%d;'); }" % i for i in range(5)]
        + ["fetch('https://feed.example/p.js');"])
    world = run_sample(src, resources=resources)
    report = build_report("sample-2", "browser", world.log)
    assert report.flagged
    assert report.forced_exec_count >= 5
    assert report.third_party_injection_count >= 1
