"""Four-stage feedback-loop orchestrator.

Architecture -> RTL -> Synthesis -> Physical, each stage iterating
propose / apply / run-tool / reflect until the verdict is Accept, the
reasoner aborts, or the iteration budget runs out.  With the scripted
reasoner and the mock tool adapter the whole flow is hermetic and
deterministic: the serialized FlowResult (which excludes wall times) is
byte-identical across runs and across any checkpoint/resume split.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .dse import DseStageError, run_dse
from .errors import (
    CheckpointCorrupt,
    ConfigInvalid,
    ConfigMismatch,
    RemoteProtocolError,
    SchemaViolation,
    ScriptExhausted,
)
from .toolchain import (
    MockAdapter,
    ToolReport,
    run_simulation,
    run_sta,
    run_synthesis,
)

SCHEMA_VERSION = 1
STAGES = ("architecture", "rtl", "synthesis", "physical")
HISTORY_WINDOW = 4  # records shown to the reasoner


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Proposal:
    writes: dict[str, str] = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    rationale: str = ""

    def digest(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return _digest(canon)

    def as_dict(self) -> dict:
        return {"writes": self.writes, "params": self.params,
                "rationale": self.rationale}

    @classmethod
    def from_dict(cls, d: dict) -> "Proposal":
        if not isinstance(d, dict):
            raise SchemaViolation("proposal must be an object")
        writes = d.get("writes", {})
        if not isinstance(writes, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in writes.items()):
            raise SchemaViolation("proposal writes must map paths to text")
        return cls(writes=dict(writes), params=dict(d.get("params", {})),
                   rationale=str(d.get("rationale", "")))


@dataclass(frozen=True)
class Verdict:
    kind: str  # accept | revise | abort
    proposal: Proposal | None = None
    reason: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("accept", "revise", "abort"):
            raise SchemaViolation(f"unknown verdict kind: {self.kind}")
        if self.kind == "revise" and (
                self.proposal is None or
                (not self.proposal.writes and not self.proposal.params)):
            raise SchemaViolation("revise verdict requires a nonempty proposal")


@dataclass(frozen=True)
class ActionRecord:
    stage: str
    iteration: int
    proposal_digest: str
    report_digest: str
    verdict: str
    wall_time: float

    def as_dict(self, include_wall_time: bool = True) -> dict:
        d = {
            "stage": self.stage,
            "iteration": self.iteration,
            "proposal_digest": self.proposal_digest,
            "report_digest": self.report_digest,
            "verdict": self.verdict,
        }
        if include_wall_time:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ActionRecord":
        return cls(
            stage=d["stage"], iteration=d["iteration"],
            proposal_digest=d["proposal_digest"],
            report_digest=d["report_digest"],
            verdict=d["verdict"], wall_time=d.get("wall_time", 0.0),
        )


@dataclass
class FlowState:
    current_stage: str = "architecture"
    statuses: dict = field(
        default_factory=lambda: {s: "pending" for s in STAGES})
    artifacts: dict = field(default_factory=dict)   # digest -> content
    paths: dict = field(default_factory=dict)       # rel path -> digest
    history: list = field(default_factory=list)     # ActionRecords
    pending_proposal: Proposal | None = None        # carried Revise payload

    def store(self, rel_path: str, content: str) -> str:
        d = _digest(content)
        self.artifacts[d] = content
        self.paths[rel_path] = d
        return d

    def as_dict(self) -> dict:
        return {
            "current_stage": self.current_stage,
            "statuses": self.statuses,
            "artifacts": self.artifacts,
            "paths": self.paths,
            "history": [r.as_dict() for r in self.history],
            "pending_proposal": (
                self.pending_proposal.as_dict() if self.pending_proposal else None),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowState":
        st = cls(
            current_stage=d["current_stage"],
            statuses=dict(d["statuses"]),
            artifacts=dict(d["artifacts"]),
            paths=dict(d["paths"]),
            history=[ActionRecord.from_dict(r) for r in d["history"]],
        )
        if d.get("pending_proposal"):
            st.pending_proposal = Proposal.from_dict(d["pending_proposal"])
        return st


@dataclass
class FlowResult:
    statuses: dict
    overall: str  # success | partial | failed
    artifacts: dict  # rel path -> digest
    history: list

    def to_json(self) -> str:
        # wall times are excluded so results compare byte-for-byte
        return json.dumps({
            "overall": self.overall,
            "statuses": self.statuses,
            "artifacts": self.artifacts,
            "history": [r.as_dict(include_wall_time=False) for r in self.history],
        }, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# reasoners
# ---------------------------------------------------------------------------

class ScriptedReasoner:
    """Table-driven reasoner: proposals indexed by (stage, iteration).

    The script maps stage names to ordered proposal lists.  propose(i)
    returns entry i; reflect on a failing report revises with entry i+1
    when one exists and aborts otherwise.
    """

    def __init__(self, script: dict) -> None:
        self.script = {
            stage: [Proposal.from_dict(p) for p in entries]
            for stage, entries in script.items()
        }

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedReasoner":
        return cls(json.loads(Path(path).read_text()))

    def propose(self, context: dict) -> Proposal:
        stage = context["stage"]
        i = context["iteration"]
        entries = self.script.get(stage, [])
        if i >= len(entries):
            raise ScriptExhausted(f"no scripted entry for ({stage}, {i})")
        return entries[i]

    def reflect(self, context: dict, report: ToolReport) -> Verdict:
        if report.status == "pass":
            return Verdict(kind="accept")
        stage = context["stage"]
        nxt = context["iteration"] + 1
        entries = self.script.get(stage, [])
        if nxt < len(entries):
            return Verdict(kind="revise", proposal=entries[nxt])
        return Verdict(kind="abort", reason=f"script exhausted after {report.status}")


def _extract_fenced_json(text: str) -> dict:
    """The single fenced JSON block a remote reply must contain."""
    blocks = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        if lines[i].strip().startswith("```"):
            j = i + 1
            while j < len(lines) and not lines[j].strip().startswith("```"):
                j += 1
            if j < len(lines):
                blocks.append("\n".join(lines[i + 1:j]))
                i = j
        i += 1
    if len(blocks) != 1:
        raise SchemaViolation(f"expected exactly one fenced block, got {len(blocks)}")
    try:
        obj = json.loads(blocks[0])
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"fenced block is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("fenced payload must be a JSON object")
    return obj


class RemoteReasoner:
    """Chat-endpoint reasoner; strict fenced-JSON reply schema.

    Each propose/reflect is one POST of a chat-style message list.  The
    reply body's text must contain exactly one fenced block holding the
    Proposal or Verdict JSON.  Transport errors retry up to 3 times
    with exponential backoff; schema errors likewise.
    """

    RETRIES = 3

    def __init__(self, endpoint: str, model: str = "default",
                 timeout_s: float = 60.0, backoff_s: float = 1.0) -> None:
        self.endpoint = endpoint
        self.model = model
        self.timeout_s = timeout_s
        self.backoff_s = backoff_s

    def _post(self, messages: list[dict]) -> str:
        body = json.dumps({"model": self.model, "messages": messages}).encode()
        headers = {"Content-Type": "application/json"}
        key = os.environ.get("AIEDA_LLM_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers)
        with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise SchemaViolation(f"malformed chat response: {exc}") from exc

    def _round_trip(self, messages: list[dict]) -> dict:
        last: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                return _extract_fenced_json(self._post(messages))
            except SchemaViolation as exc:
                last = exc
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
                last = exc
            if attempt + 1 < self.RETRIES:
                time.sleep(self.backoff_s * (2 ** attempt))
        if isinstance(last, SchemaViolation):
            raise last
        raise RemoteProtocolError(f"endpoint failed after {self.RETRIES} attempts: {last}")

    def propose(self, context: dict) -> Proposal:
        messages = [
            {"role": "system",
             "content": "Reply with exactly one fenced JSON block: "
                        '{"writes": {path: text}, "params": {}, "rationale": ""}.'},
            {"role": "user", "content": json.dumps(context, sort_keys=True)},
        ]
        return Proposal.from_dict(self._round_trip(messages))

    def reflect(self, context: dict, report: ToolReport) -> Verdict:
        messages = [
            {"role": "system",
             "content": "Reply with exactly one fenced JSON block: "
                        '{"kind": "accept"|"revise"|"abort", "proposal": {...}, '
                        '"reason": ""}.'},
            {"role": "user", "content": json.dumps(
                {"context": context, "report": report.as_dict()}, sort_keys=True)},
        ]
        obj = self._round_trip(messages)
        kind = obj.get("kind", "")
        if kind == "accept" and report.status != "pass":
            raise SchemaViolation("accept verdict on a non-passing report")
        prop = Proposal.from_dict(obj["proposal"]) if obj.get("proposal") else None
        return Verdict(kind=kind, proposal=prop, reason=str(obj.get("reason", "")))


# ---------------------------------------------------------------------------
# stage execution
# ---------------------------------------------------------------------------

def _safe_join(root: Path, rel: str) -> Path:
    target = (root / rel).resolve()
    if not str(target).startswith(str(root.resolve()) + os.sep):
        raise ConfigInvalid(f"write escapes the workspace: {rel}")
    return target


def _apply_writes(state: FlowState, workdir: Path, proposal: Proposal) -> None:
    for rel, content in proposal.writes.items():
        path = _safe_join(workdir, rel)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        state.store(rel, content)


def run_stage(
    state: FlowState,
    reasoner,
    adapter,
    budget: int,
    stage: str,
    workdir: Path,
    on_record=None,
) -> FlowState:
    """Iterate propose/apply/run/reflect until accept, abort, or budget."""
    if budget < 1:
        raise ConfigInvalid("stage budget must be >= 1")
    state.statuses[stage] = "running"
    proposal = state.pending_proposal
    start = len([r for r in state.history if r.stage == stage])
    for iteration in range(start, budget):
        t0 = time.monotonic()
        context = {
            "stage": stage,
            "iteration": iteration,
            "artifacts": dict(state.paths),
            "history": [r.as_dict(include_wall_time=False)
                        for r in state.history[-HISTORY_WINDOW:]],
        }
        if proposal is None:
            proposal = reasoner.propose(context)
        _apply_writes(state, workdir, proposal)
        report = adapter(proposal, workdir)
        verdict = reasoner.reflect(context, report)
        state.history.append(ActionRecord(
            stage=stage,
            iteration=iteration,
            proposal_digest=proposal.digest(),
            report_digest=report.digest(),
            verdict=verdict.kind,
            wall_time=time.monotonic() - t0,
        ))
        if verdict.kind == "accept":
            state.statuses[stage] = "passed"
        elif verdict.kind == "abort" or iteration + 1 >= budget:
            state.statuses[stage] = "failed"
        state.pending_proposal = (
            verdict.proposal
            if verdict.kind == "revise" and state.statuses[stage] == "running"
            else None)
        if on_record is not None:
            on_record(state)
        if verdict.kind != "revise":
            return state
        proposal = verdict.proposal
    if state.statuses[stage] == "running":
        state.statuses[stage] = "failed"
        state.pending_proposal = None
    return state


# ---------------------------------------------------------------------------
# whole-flow orchestration
# ---------------------------------------------------------------------------

def _config_hash(config: dict) -> str:
    return _digest(json.dumps(config, sort_keys=True, separators=(",", ":")))


def validate_config(config: dict) -> None:
    if not isinstance(config, dict):
        raise ConfigInvalid("config must be a JSON object")
    if "workdir" not in config:
        raise ConfigInvalid("config requires a workdir")
    stages = config.get("stages")
    if not isinstance(stages, dict) or not stages:
        raise ConfigInvalid("config requires a stages object")
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ConfigInvalid(f"unknown stages: {sorted(unknown)}")
    for name in ("rtl", "synthesis"):
        sc = stages.get(name)
        if sc is None:
            continue
        if not isinstance(sc.get("budget", 1), int) or sc.get("budget", 1) < 1:
            raise ConfigInvalid(f"{name} budget must be a positive integer")
        adapter = sc.get("adapter", "real")
        if adapter not in ("real", "mock"):
            raise ConfigInvalid(f"{name} adapter must be 'real' or 'mock'")
        if adapter == "mock" and "scenario" not in sc:
            raise ConfigInvalid(f"{name} mock adapter requires a scenario file")
    rcfg = config.get("reasoner", {"kind": "scripted"})
    if rcfg.get("kind") not in ("scripted", "remote"):
        raise ConfigInvalid("reasoner kind must be scripted or remote")
    if rcfg.get("kind") == "scripted" and "rtl" in stages and "script" not in rcfg:
        raise ConfigInvalid("scripted reasoner requires a script file")
    if rcfg.get("kind") == "remote" and "endpoint" not in rcfg:
        raise ConfigInvalid("remote reasoner requires an endpoint")


def _build_reasoner(config: dict):
    rcfg = config.get("reasoner", {"kind": "scripted"})
    if rcfg["kind"] == "scripted":
        return ScriptedReasoner.from_file(rcfg["script"])
    return RemoteReasoner(
        endpoint=rcfg["endpoint"],
        model=rcfg.get("model", "default"),
        timeout_s=rcfg.get("timeout_s", 60.0),
    )


def _build_adapter(stage_cfg: dict, stage: str, skip: int = 0):
    if stage_cfg.get("adapter", "real") == "mock":
        mock = MockAdapter.from_file(stage_cfg["scenario"])
        mock.calls = skip  # scenario entries consumed before a resume

        def mock_adapter(proposal: Proposal, workdir: Path) -> ToolReport:
            return mock()

        return mock_adapter

    if stage == "rtl":
        def sim_adapter(proposal: Proposal, workdir: Path) -> ToolReport:
            files = sorted(proposal.writes)
            tbs = [f for f in files if "tb" in f]
            rtl = [f for f in files if f not in tbs]
            if not tbs:
                return ToolReport(status="compile_error",
                                  failures=("proposal contains no testbench",))
            return run_simulation(rtl, tbs[0], workdir,
                                  timeout=stage_cfg.get("timeout_s", 60.0))
        return sim_adapter

    def synth_adapter(proposal: Proposal, workdir: Path) -> ToolReport:
        rtl = sorted(f for f in proposal.writes if f.endswith(".v"))
        report = run_synthesis(rtl, workdir,
                               liberty=stage_cfg.get("liberty"),
                               timeout=stage_cfg.get("timeout_s", 120.0))
        if report.status != "pass":
            return report
        if stage_cfg.get("liberty") and stage_cfg.get("sdc"):
            sta = run_sta("netlist.v", stage_cfg["sdc"], stage_cfg["liberty"],
                          workdir, timeout=stage_cfg.get("timeout_s", 60.0))
            if sta.status != "pass" or (sta.worst_slack_ns or -1) < 0:
                return sta
            return ToolReport(status="pass", cell_count=report.cell_count,
                              worst_slack_ns=sta.worst_slack_ns,
                              raw_capture=report.raw_capture + sta.raw_capture)
        return report
    return synth_adapter


def _run_architecture(state: FlowState, config: dict, workdir: Path) -> None:
    acfg = config["stages"].get("architecture", {})
    state.statuses["architecture"] = "running"
    t0 = time.monotonic()
    try:
        report = run_dse(acfg.get("corpus"), acfg.get("dse"))
    except DseStageError as exc:
        state.store("dse_report.json", exc.report.to_json())
        state.history.append(ActionRecord(
            stage="architecture", iteration=0,
            proposal_digest=_digest("run_dse"),
            report_digest=_digest(exc.report.to_json()),
            verdict="abort", wall_time=time.monotonic() - t0))
        state.statuses["architecture"] = "failed"
        return
    point_json = json.dumps(report.chosen_point.as_dict(),
                            indent=2, sort_keys=True) + "\n"
    (workdir / "design_point.json").write_text(point_json)
    state.store("design_point.json", point_json)
    state.store("dse_report.json", report.to_json())
    state.history.append(ActionRecord(
        stage="architecture", iteration=0,
        proposal_digest=_digest("run_dse"),
        report_digest=_digest(report.to_json()),
        verdict="accept", wall_time=time.monotonic() - t0))
    state.statuses["architecture"] = "passed"


def _finish(state: FlowState) -> FlowResult:
    ran = {s: st for s, st in state.statuses.items() if st != "pending"}
    if any(st == "failed" for st in ran.values()):
        overall = "failed"
    elif any(st == "skipped" for st in ran.values()):
        overall = "partial"
    else:
        overall = "success"
    return FlowResult(
        statuses=dict(state.statuses),
        overall=overall,
        artifacts=dict(state.paths),
        history=list(state.history),
    )


class _StopRequested(Exception):
    pass


def _execute(config: dict, state: FlowState,
             checkpoint_path: str | Path | None,
             stop_after: int | None = None) -> FlowResult:
    workdir = Path(config["workdir"])
    workdir.mkdir(parents=True, exist_ok=True)
    stages_cfg = config["stages"]

    def after_record(st: FlowState) -> None:
        if checkpoint_path is not None:
            save_checkpoint(st, config, checkpoint_path)
        if stop_after is not None and len(st.history) >= stop_after:
            raise _StopRequested

    order = [s for s in STAGES if s in stages_cfg]
    try:
        _run_stages(order, state, config, stages_cfg, workdir, after_record)
    except _StopRequested:
        pass
    return _finish(state)


def _run_stages(order, state, config, stages_cfg, workdir, after_record) -> None:
    for stage in order:
        if state.statuses[stage] in ("passed", "skipped"):
            continue
        state.current_stage = stage
        if stage == "architecture":
            _run_architecture(state, config, workdir)
            after_record(state)
        elif stage == "physical":
            if stages_cfg["physical"].get("command"):
                import subprocess
                t0 = time.monotonic()
                proc = subprocess.run(
                    stages_cfg["physical"]["command"], shell=True, cwd=workdir,
                    stdout=subprocess.PIPE, stderr=subprocess.STDOUT)
                status = "passed" if proc.returncode == 0 else "failed"
                state.history.append(ActionRecord(
                    stage="physical", iteration=0,
                    proposal_digest=_digest("external"),
                    report_digest=_digest(proc.stdout.decode("utf-8", "replace")),
                    verdict="accept" if status == "passed" else "abort",
                    wall_time=time.monotonic() - t0))
                state.statuses["physical"] = status
            else:
                state.statuses["physical"] = "skipped"
            after_record(state)
        else:
            scfg = stages_cfg[stage]
            reasoner = _build_reasoner(config)
            done = len([r for r in state.history if r.stage == stage])
            adapter = _build_adapter(scfg, stage, skip=done)
            run_stage(state, reasoner, adapter, scfg.get("budget", 4),
                      stage, workdir, on_record=after_record)
        if state.statuses[stage] == "failed":
            break


def run_flow(config: dict, checkpoint_path: str | Path | None = None,
             stop_after: int | None = None) -> FlowResult:
    """Run the flow from scratch.

    stop_after halts the run once that many history records exist (the
    checkpoint, if configured, is saved first), which lets callers
    exercise resume at any iteration boundary.
    """
    validate_config(config)
    return _execute(config, FlowState(), checkpoint_path, stop_after)


def resume_flow(config: dict, checkpoint_path: str | Path) -> FlowResult:
    validate_config(config)
    state = load_checkpoint(checkpoint_path, config)
    return _execute(config, state, checkpoint_path)


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def save_checkpoint(state: FlowState, config: dict, path: str | Path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": _config_hash(config),
        "state": state.as_dict(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_checkpoint(path: str | Path, config: dict) -> FlowState:
    try:
        doc = json.loads(Path(path).read_text())
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise CheckpointCorrupt(
                f"unsupported schema_version {doc.get('schema_version')}")
        if doc["config_hash"] != _config_hash(config):
            raise ConfigMismatch("checkpoint was produced under a different config")
        return FlowState.from_dict(doc["state"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CheckpointCorrupt(f"unreadable checkpoint: {exc}") from exc
