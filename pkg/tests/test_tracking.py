"""Provenance records, injection chains, and the JSONL log surface."""
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchforce.tracking import (
    ARG_BYTE_CAP,
    ChainStats,
    Eval,
    ForcedExecEvent,
    Injected,
    Local,
    Root,
    RunLog,
    ScriptRecord,
    chain_lengths,
    chain_paths,
    coverage_loc,
    emit_log_text,
    is_third_party,
    provenance_to_json,
    script_id_sort_key,
    truncate_summary,
)


def make_record(script_id, provenance, children=()):
    record = ScriptRecord(script_id, provenance, line_count=1)
    record.children.extend(children)
    return record


def oracle_chain_paths(scripts):
    """Independent chain enumeration: explicit stack DFS over the forest,
    counting only Injected/Eval edges, one entry per maximal path."""
    chain_kids = {}
    for sid, rec in scripts.items():
        chain_kids[sid] = [
            c for c in rec.children
            if c in scripts and isinstance(scripts[c].provenance, (Eval, Injected))
        ]
    lengths = []
    for sid, rec in scripts.items():
        if not isinstance(rec.provenance, Root):
            continue
        stack = [(sid, 1)]
        while stack:
            cur, depth = stack.pop()
            kids = chain_kids[cur]
            if not kids:
                lengths.append(depth)
            for kid in kids:
                stack.append((kid, depth + 1))
    return sorted(lengths)


# -- provenance -----------------------------------------------------------------


def test_third_party_is_injected_outside_origin():
    origin = "ext://abc/"
    assert is_third_party(Injected("s0", "https://evil.example/x.js"), origin)
    assert not is_third_party(Injected("s0", "ext://abc/own.js"), origin)
    assert not is_third_party(Root("input.js"), origin)
    assert not is_third_party(Eval("s0"), origin)
    assert not is_third_party(Local("s0", "./lib.js"), origin)


def test_provenance_json_shapes():
    assert provenance_to_json(Root("a.js")) == {"kind": "root", "path": "a.js"}
    assert provenance_to_json(Eval("s1")) == {"kind": "eval", "parent": "s1"}
    assert provenance_to_json(Injected("s1", "u")) == {
        "kind": "injected", "parent": "s1", "url": "u"}
    assert provenance_to_json(Local("s2", "./m.js")) == {
        "kind": "local", "parent": "s2", "path": "./m.js"}


# -- chains ---------------------------------------------------------------------


def test_chain_histogram_frozen_example():
    # three maximal paths of lengths 1, 1, 2:
    #   r0 (leaf), r1 (leaf), r2 -> child
    scripts = {
        "s0": make_record("s0", Root("a")),
        "s1": make_record("s1", Root("b")),
        "s2": make_record("s2", Root("c"), children=["s3"]),
        "s3": make_record("s3", Injected("s2", "https://x/y.js")),
    }
    assert oracle_chain_paths(scripts) == [1, 1, 2]
    stats = chain_lengths(scripts)
    assert stats.histogram == {1: 3, 2: 1}
    assert stats.average == pytest.approx(4 / 3)
    assert stats.max_length == 2
    assert stats.script_count == 4


def test_local_children_do_not_lengthen_chains():
    scripts = {
        "s0": make_record("s0", Root("a"), children=["s1"]),
        "s1": make_record("s1", Local("s0", "./util.js"), children=["s2"]),
        "s2": make_record("s2", Eval("s1")),
    }
    # the Local edge cuts the path: s0 is a chain leaf
    assert chain_paths(scripts) == [1]
    assert oracle_chain_paths(scripts) == [1]


def test_eight_deep_chain():
    scripts = {"s0": make_record("s0", Root("a"), children=["s1"])}
    for i in range(1, 8):
        kids = ["s%d" % (i + 1)] if i < 7 else []
        scripts["s%d" % i] = make_record(
            "s%d" % i, Eval("s%d" % (i - 1)), children=kids)
    stats = chain_lengths(scripts)
    assert stats.max_length == 8
    assert stats.histogram[8] == 1
    assert stats.histogram[1] == 1
    assert stats.average == 8.0


def test_branching_chains_count_every_maximal_path():
    scripts = {
        "s0": make_record("s0", Root("a"), children=["s1", "s2"]),
        "s1": make_record("s1", Eval("s0")),
        "s2": make_record("s2", Injected("s0", "u"), children=["s3"]),
        "s3": make_record("s3", Eval("s2")),
    }
    assert sorted(chain_paths(scripts)) == [2, 3]
    stats = chain_lengths(scripts)
    assert stats.histogram == {1: 2, 2: 2, 3: 1}


def test_empty_log_chain_stats():
    stats = chain_lengths({})
    assert stats == ChainStats(histogram={}, average=0.0, max_length=0,
                               script_count=0)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_chain_paths_match_bruteforce_oracle(data):
    n = data.draw(st.integers(min_value=1, max_value=14))
    scripts = {}
    for i in range(n):
        sid = "s%d" % i
        if i == 0 or data.draw(st.booleans(), label="is_root_%d" % i):
            prov = Root("p%d" % i)
        else:
            parent = "s%d" % data.draw(
                st.integers(min_value=0, max_value=i - 1), label="parent_%d" % i)
            kind = data.draw(st.sampled_from(["eval", "injected", "local"]),
                             label="kind_%d" % i)
            if kind == "eval":
                prov = Eval(parent)
            elif kind == "injected":
                prov = Injected(parent, "https://h/%d.js" % i)
            else:
                prov = Local(parent, "./%d.js" % i)
            scripts[parent].children.append(sid)
        scripts[sid] = make_record(sid, prov)
    assert sorted(chain_paths(scripts)) == oracle_chain_paths(scripts)


def test_coverage_loc_sums_executed_lines():
    a = make_record("s0", Root("a"))
    a.executed_lines.update({1, 2, 5})
    b = make_record("s1", Eval("s0"))
    b.executed_lines.update({1})
    assert coverage_loc([a, b]) == 4


# -- summaries and ids ------------------------------------------------------------


def test_truncate_summary_byte_cap():
    text = "a" * 300
    out = truncate_summary(text)
    assert len(out.encode("utf-8")) == ARG_BYTE_CAP
    assert out == "a" * ARG_BYTE_CAP


def test_truncate_summary_never_splits_codepoints():
    # 2-byte codepoints; an odd cap boundary must drop the partial char
    text = "é" * 200
    out = truncate_summary(text, cap=255)
    assert len(out.encode("utf-8")) <= 255
    assert all(ch == "é" for ch in out)


def test_script_id_sort_key_orders_contexts_then_numbers():
    ids = ["c1.s2", "c0.s10", "c0.s5", "c1.s10"]
    ordered = sorted(ids, key=script_id_sort_key)
    assert ordered == ["c0.s5", "c0.s10", "c1.s2", "c1.s10"]


def test_script_id_sort_key_is_numeric_not_lexicographic():
    # a log holds either plain or context-prefixed ids, never both
    assert script_id_sort_key("s2") < script_id_sort_key("s10")
    assert script_id_sort_key("c0.s2") < script_id_sort_key("c0.s10")
    assert script_id_sort_key("weird") == (1 << 30, 1 << 30)


# -- RunLog + JSONL ----------------------------------------------------------------


def build_sample_log():
    log = RunLog(origin="ext://abc/")
    root = log.new_script(Root("input.js"), line_count=10)
    root.executed_lines.update({3, 1, 2})
    log.log_api(root.script_id, "setTimeout", "function <anon>, 93445000", 1)
    child = log.new_script(Injected(root.script_id, "https://x/y.js"), line_count=2)
    root.children.append(child.script_id)
    child.executed_lines.add(1)
    log.log_forced(ForcedExecEvent(
        script_id=root.script_id, line=4, kind="IfStatement",
        apis=("eval",), guard="false"))
    log.log_resource_404("https://gone.example/a.js")
    log.log_command("ls -la")
    return log


def test_runlog_counts():
    log = build_sample_log()
    assert log.forced_count == 1
    assert log.third_party_injection_count == 1


def test_emit_log_schema_and_order():
    lines = [json.loads(l) for l in emit_log_text(build_sample_log()).splitlines()]
    kinds = [l["t"] for l in lines]
    assert kinds == ["api", "forced", "resource404", "command", "script", "script"]
    api = lines[0]
    assert set(api) == {"t", "id", "name", "args", "line"}
    assert api["name"] == "setTimeout"
    forced = lines[1]
    assert set(forced) == {"t", "id", "kind", "apis", "guard", "line"}
    assert forced["apis"] == ["eval"]
    assert lines[2] == {"t": "resource404", "url": "https://gone.example/a.js"}
    assert lines[3] == {"t": "command", "cmd": "ls -la"}
    script = lines[4]
    assert set(script) == {"t", "id", "prov", "lines"}
    assert script["id"] == "s0"
    assert script["lines"] == [1, 2, 3]
    assert lines[5]["prov"] == {"kind": "injected", "parent": "s0",
                                "url": "https://x/y.js"}


def test_emit_log_deterministic():
    a = emit_log_text(build_sample_log())
    b = emit_log_text(build_sample_log())
    assert a == b


def test_api_args_truncated_on_log():
    log = RunLog(origin="o/")
    log.log_api("s0", "eval", "x" * 1000, 1)
    assert len(log.api_calls[0].args.encode("utf-8")) == ARG_BYTE_CAP


def test_absorb_merges_and_rejects_duplicates():
    master = RunLog(origin="ext://abc/")
    ctx0 = RunLog(origin="ext://abc/", id_prefix="c0.")
    ctx0.new_script(Root("a.js"), 1)
    ctx0.log_command("w")
    ctx1 = RunLog(origin="ext://abc/", id_prefix="c1.")
    ctx1.new_script(Root("a.js"), 1)
    master.absorb(ctx0)
    master.absorb(ctx1)
    assert set(master.scripts) == {"c0.s0", "c1.s0"}
    assert master.commands == ["w"]
    dup = RunLog(origin="ext://abc/", id_prefix="c0.")
    dup.new_script(Root("a.js"), 1)
    with pytest.raises(ValueError):
        master.absorb(dup)


def test_new_script_ids_use_prefix():
    log = RunLog(origin="o/", id_prefix="c2.")
    first = log.new_script(Root("x"), 1)
    second = log.new_script(Eval(first.script_id), 1)
    assert first.script_id == "c2.s0"
    assert second.script_id == "c2.s1"
