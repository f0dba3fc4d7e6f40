"""End-to-end orchestration: execute samples, report, aggregate, expand.

Browser samples run in several page contexts (fresh globals, shared
resource fixtures) whose logs merge into one per-sample aggregate; npm
samples run once. Every run is fully offline: URLs and shell commands
resolve against fixtures, never the real world.
"""
from __future__ import annotations

import json
import pathlib
import time
from dataclasses import dataclass, field
from typing import Optional

from ..catalog import ApiCatalog, default_catalog
from ..clustering import (ClusterAssignment, build_feature_vector, dbscan,
                          expand_flags, write_assignments, write_vectors)
from ..frontend import LexError, ParseError, UnsupportedSyntax, parse
from ..postprocess import (DEFAULT_FLAG_THRESHOLD, DEFAULT_TIMEBOMB_FLOOR_MS,
                           Metrics, SampleReport, build_report, compute_metrics)
from ..runtime import HostWorld, Interpreter, ResourceResolver
from ..runtime.host import DEFAULT_MAX_DEPTH, DEFAULT_STEP_BUDGET
from ..scanner import DEFAULT_SCAN_LIMIT
from ..tracking import Root, RunLog, emit_log
from .samples import PrefilterDecision, Sample, prefilter

BROWSER_CONTEXTS = 3


@dataclass
class PipelineConfig:
    threshold: int = DEFAULT_FLAG_THRESHOLD
    scan_limit: int = DEFAULT_SCAN_LIMIT
    step_budget: int = DEFAULT_STEP_BUDGET
    max_depth: int = DEFAULT_MAX_DEPTH
    contexts: int = BROWSER_CONTEXTS
    seed: int = 0
    baseline: bool = True
    run_prefilter: bool = False
    catalog: Optional[ApiCatalog] = None
    # resolver fixtures applied under every sample's own fixtures
    resolver_doc: dict = field(default_factory=dict)
    eps: float = 0.3
    min_pts: int = 2
    metric: str = "jaccard"
    timebomb_floor_ms: float = DEFAULT_TIMEBOMB_FLOOR_MS

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "scan_limit": self.scan_limit,
            "step_budget": self.step_budget,
            "max_depth": self.max_depth,
            "contexts": self.contexts,
            "seed": self.seed,
            "baseline": self.baseline,
            "run_prefilter": self.run_prefilter,
            "eps": self.eps,
            "min_pts": self.min_pts,
            "metric": self.metric,
            "timebomb_floor_ms": self.timebomb_floor_ms,
        }


@dataclass
class SampleRun:
    sample: Sample
    report: SampleReport
    log: RunLog
    baseline_log: Optional[RunLog]


def _merged_resolver(sample: Sample, config: PipelineConfig) -> ResourceResolver:
    doc = {"resources": {}, "commands": {}}
    for source in (config.resolver_doc, sample.resources):
        for key in ("resources", "commands"):
            doc[key].update(source.get(key) or {})
    return ResourceResolver.from_dict(doc)


def _execute(sample: Sample, config: PipelineConfig,
             force: bool) -> tuple[RunLog, int]:
    """All contexts of one sample under one forcing setting."""
    resolver = _merged_resolver(sample, config)
    origin = "ext://%s/" % sample.sample_id
    master = RunLog(origin)
    contexts = config.contexts if sample.mode == "browser" else 1
    depth_skips = 0
    for ctx in range(contexts):
        prefix = "c%d." % ctx if contexts > 1 else ""
        log = RunLog(origin, prefix)
        world = HostWorld(
            sample.mode,
            resolver=resolver,
            sample_id=sample.sample_id,
            seed=config.seed + ctx,
            fire_timers=force,
            step_budget=config.step_budget,
            max_depth=config.max_depth,
            log=log,
        )
        interp = Interpreter(world, catalog=config.catalog, force=force,
                             scan_limit=config.scan_limit)
        for entry in sample.entries:
            interp.run(entry.text, path=entry.path)
        depth_skips += world.depth_skips
        master.absorb(log)
    for command in sample.commands:
        # package-level install hooks, recorded during ingest, never executed
        master.log_command(command)
    return master, depth_skips


def _root_problems(log: RunLog) -> list[str]:
    problems = []
    for record in log.scripts.values():
        if isinstance(record.provenance, Root) and record.error:
            problems.append("%s (%s): %s" % (
                record.script_id, record.provenance.path, record.error))
    return problems


def run_sample(sample: Sample, config: PipelineConfig) -> SampleRun:
    try:
        log, depth_skips = _execute(sample, config, force=True)
        baseline_log = _execute(sample, config, force=False)[0] \
            if config.baseline else None
        errors = _root_problems(log)
    except Exception as exc:  # crash isolation: one bad sample cannot sink the run
        log = RunLog("ext://%s/" % sample.sample_id)
        baseline_log = None
        errors = ["harness failure: %r" % exc]
        depth_skips = 0
    report = build_report(
        sample.sample_id, sample.mode, log,
        baseline_log=baseline_log,
        threshold=config.threshold,
        timebomb_floor_ms=config.timebomb_floor_ms,
        label=sample.label,
        errors=errors,
        depth_skips=depth_skips,
    )
    return SampleRun(sample, report, log, baseline_log)


def _feature_vectors(samples: list[Sample]):
    vectors = []
    for sample in samples:
        programs = []
        for entry in sample.entries:
            try:
                programs.append(parse(entry.text))
            except (LexError, ParseError, UnsupportedSyntax):
                continue
        vectors.append(build_feature_vector(sample.sample_id, programs,
                                            mode=sample.mode))
    return vectors


@dataclass
class PipelineResult:
    runs: list[SampleRun]
    decisions: list[PrefilterDecision]
    metrics: Optional[Metrics]
    assignments: list[ClusterAssignment]
    expanded: list[str]
    run_dir: Optional[str]

    @property
    def reports(self) -> list[SampleReport]:
        return [r.report for r in self.runs]

    @property
    def exit_code(self) -> int:
        return 2 if any(r.report.errors for r in self.runs) else 0

    def summary(self, config: PipelineConfig) -> dict:
        flagged = sorted(r.report.sample_id for r in self.runs if r.report.flagged)
        doc = {
            "config": config.to_json(),
            "samples": [r.report.to_json() for r in self.runs],
            "prefilter": [
                {"sample_id": d.sample_id, "kept": d.kept, "reason": d.reason}
                for d in self.decisions
            ],
            "flagged": flagged,
            "expanded": sorted(self.expanded),
            "clusters": [
                {"id": a.sample_id, "label": a.label, "core": a.is_core}
                for a in self.assignments
            ],
            "metrics": None,
            "exit_code": self.exit_code,
        }
        if self.metrics is not None:
            doc["metrics"] = {
                "tp": self.metrics.tp, "fp": self.metrics.fp,
                "tn": self.metrics.tn, "fn": self.metrics.fn,
                "precision": self.metrics.precision,
                "recall": self.metrics.recall,
                "f1": self.metrics.f1,
            }
        return doc


def run_pipeline(samples: list[Sample], config: Optional[PipelineConfig] = None,
                 out_dir: Optional[str] = None) -> PipelineResult:
    config = config or PipelineConfig()
    samples = sorted(samples, key=lambda s: s.sample_id)
    decisions: list[PrefilterDecision] = []
    if config.run_prefilter:
        samples, decisions = prefilter(samples, config.catalog)

    runs = [run_sample(sample, config) for sample in samples]

    labeled = [r for r in runs if r.sample.label in ("benign", "malicious")]
    metrics = None
    if labeled:
        metrics = compute_metrics(
            {r.sample.sample_id: r.report.flagged for r in labeled},
            {r.sample.sample_id: r.sample.label == "malicious" for r in labeled},
        )

    vectors = _feature_vectors([r.sample for r in runs])
    assignments = dbscan(vectors, eps=config.eps, min_pts=config.min_pts,
                         metric=config.metric) if vectors else []
    flagged_ids = {r.report.sample_id for r in runs if r.report.flagged}
    expanded = sorted(expand_flags(assignments, flagged_ids))

    result = PipelineResult(runs, decisions, metrics, assignments, expanded, None)

    if out_dir is not None:
        stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
        run_root = pathlib.Path(out_dir) / stamp
        samples_root = run_root / "samples"
        samples_root.mkdir(parents=True, exist_ok=True)
        for run in runs:
            sample_dir = samples_root / run.report.sample_id
            sample_dir.mkdir(parents=True, exist_ok=True)
            with open(sample_dir / "log.jsonl", "w", encoding="utf-8") as fh:
                emit_log(run.log, fh)
            if run.baseline_log is not None:
                with open(sample_dir / "baseline.jsonl", "w", encoding="utf-8") as fh:
                    emit_log(run.baseline_log, fh)
            with open(sample_dir / "report.json", "w", encoding="utf-8") as fh:
                json.dump(run.report.to_json(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        with open(run_root / "vectors.jsonl", "w", encoding="utf-8") as fh:
            write_vectors(vectors, fh)
        with open(run_root / "assignments.jsonl", "w", encoding="utf-8") as fh:
            write_assignments(assignments, fh)
        with open(run_root / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(result.summary(config), fh, indent=2, sort_keys=True)
            fh.write("\n")
        result.run_dir = str(run_root)

    return result
