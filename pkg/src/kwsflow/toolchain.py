"""Adapters around external EDA tools plus a hermetic mock.

Every adapter returns a ToolReport; parsers are total, so arbitrary
tool output produces a structured report (worst case: parse_error with
the raw capture attached) rather than an exception.  Live-tool paths
are exercised only when the binaries exist; tests gate them behind
AIEDA_ENABLE_REAL_TOOLS because report formats drift across versions.
"""

from __future__ import annotations

import hashlib
import json
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ScenarioExhausted

Status = str  # pass | fail | compile_error | timeout | tool_missing | parse_error


@dataclass(frozen=True)
class ToolReport:
    status: Status
    failures: tuple[str, ...] = ()
    cell_count: int | None = None
    worst_slack_ns: float | None = None
    raw_capture: str = ""

    def __post_init__(self) -> None:
        if self.status == "pass" and self.failures:
            raise ValueError("a passing report cannot carry failures")

    def digest(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "failures": list(self.failures),
            "cell_count": self.cell_count,
            "worst_slack_ns": self.worst_slack_ns,
            "raw_capture": self.raw_capture,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToolReport":
        return cls(
            status=str(d.get("status", "parse_error")),
            failures=tuple(str(f) for f in d.get("failures", [])),
            cell_count=d.get("cell_count"),
            worst_slack_ns=d.get("worst_slack_ns"),
            raw_capture=str(d.get("raw_capture", "")),
        )


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data or ""


def _run(cmd: list[str], workdir: Path, timeout: float) -> tuple[int, str] | ToolReport:
    """Run a child process; returns (exit code, capture) or an error report."""
    try:
        proc = subprocess.run(
            cmd,
            cwd=workdir,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=timeout,
        )
    except FileNotFoundError:
        return ToolReport(status="tool_missing", failures=(f"not found: {cmd[0]}",))
    except subprocess.TimeoutExpired as exc:
        return ToolReport(
            status="timeout",
            failures=(f"killed after {timeout}s",),
            raw_capture=_decode(exc.output or b""),
        )
    return proc.returncode, _decode(proc.stdout)


# ---------------------------------------------------------------------------
# report parsers (total functions)
# ---------------------------------------------------------------------------

_FAIL_RE = re.compile(r"TEST FAIL:?\s*(.*)")
_CELLS_RE = re.compile(r"Number of cells:\s*(\d+)")
_SLACK_RE = re.compile(r"worst slack(?:\s+\w+)?\s+(-?\d+(?:\.\d+)?)")


def parse_simulation_output(text: bytes | str) -> ToolReport:
    """PASS/FAIL line protocol: 'TEST PASS' or 'TEST FAIL: <msg>' lines."""
    cap = _decode(text)
    failures = tuple(m.group(1).strip() for m in _FAIL_RE.finditer(cap))
    if failures:
        return ToolReport(status="fail", failures=failures, raw_capture=cap)
    if "TEST PASS" in cap:
        return ToolReport(status="pass", raw_capture=cap)
    return ToolReport(
        status="parse_error",
        failures=("no TEST PASS/FAIL line found",),
        raw_capture=cap,
    )


def parse_synthesis_output(text: bytes | str) -> ToolReport:
    cap = _decode(text)
    m = _CELLS_RE.search(cap)
    if m is None:
        return ToolReport(
            status="parse_error",
            failures=("no 'Number of cells:' line found",),
            raw_capture=cap,
        )
    return ToolReport(status="pass", cell_count=int(m.group(1)), raw_capture=cap)


def parse_sta_output(text: bytes | str) -> ToolReport:
    cap = _decode(text)
    m = _SLACK_RE.search(cap)
    if m is None:
        return ToolReport(
            status="parse_error",
            failures=("no 'worst slack' line found",),
            raw_capture=cap,
        )
    slack = float(m.group(1))
    if slack < 0:
        return ToolReport(
            status="fail",
            failures=("timing violation",),
            worst_slack_ns=slack,
            raw_capture=cap,
        )
    return ToolReport(status="pass", worst_slack_ns=slack, raw_capture=cap)


# ---------------------------------------------------------------------------
# tool adapters
# ---------------------------------------------------------------------------

def run_simulation(
    rtl_files: list[str],
    testbench: str,
    workdir: str | Path,
    timeout: float = 60.0,
    iverilog: str = "iverilog",
    vvp: str = "vvp",
) -> ToolReport:
    """Compile with Icarus Verilog and run the testbench binary."""
    wd = Path(workdir)
    for f in [*rtl_files, testbench]:
        if not (wd / f).is_file():
            return ToolReport(status="compile_error", failures=(f"missing file: {f}",))
    out = _run([iverilog, "-g2012", "-o", "sim.vvp", *rtl_files, testbench], wd, timeout)
    if isinstance(out, ToolReport):
        return out
    code, cap = out
    if code != 0:
        return ToolReport(
            status="compile_error",
            failures=("iverilog exited nonzero",),
            raw_capture=cap,
        )
    out = _run([vvp, "sim.vvp"], wd, timeout)
    if isinstance(out, ToolReport):
        return out
    _, cap2 = out
    return parse_simulation_output(cap2)


def run_synthesis(
    rtl_files: list[str],
    workdir: str | Path,
    liberty: str | None = None,
    timeout: float = 120.0,
    yosys: str = "yosys",
    top: str | None = None,
) -> ToolReport:
    """Synthesize to a gate-level netlist with Yosys and count cells."""
    wd = Path(workdir)
    for f in rtl_files:
        if not (wd / f).is_file():
            return ToolReport(status="compile_error", failures=(f"missing file: {f}",))
    lines = [f"read_verilog {f}" for f in rtl_files]
    lines.append(f"synth -top {top}" if top else "synth")
    if liberty:
        lines.append(f"dfflibmap -liberty {liberty}")
        lines.append(f"abc -liberty {liberty}")
    lines.append("stat")
    lines.append("write_verilog netlist.v")
    (wd / "synth.ys").write_text("\n".join(lines) + "\n")
    out = _run([yosys, "-s", "synth.ys"], wd, timeout)
    if isinstance(out, ToolReport):
        return out
    code, cap = out
    if code != 0:
        return ToolReport(
            status="compile_error",
            failures=("yosys exited nonzero",),
            raw_capture=cap,
        )
    return parse_synthesis_output(cap)


def run_sta(
    netlist: str,
    constraints: str,
    liberty: str,
    workdir: str | Path,
    timeout: float = 60.0,
    opensta: str = "sta",
) -> ToolReport:
    """Worst-slack query through OpenSTA."""
    wd = Path(workdir)
    for f in (netlist, constraints, liberty):
        if not (wd / f).is_file():
            return ToolReport(status="compile_error", failures=(f"missing file: {f}",))
    script = "\n".join([
        f"read_liberty {liberty}",
        f"read_verilog {netlist}",
        "link_design [lindex [get_property [get_designs] name] 0]",
        f"read_sdc {constraints}",
        "report_worst_slack -max",
        "exit",
    ]) + "\n"
    (wd / "sta.tcl").write_text(script)
    out = _run([opensta, "-exit", "sta.tcl"], wd, timeout)
    if isinstance(out, ToolReport):
        return out
    code, cap = out
    if code != 0:
        return ToolReport(
            status="compile_error",
            failures=("sta exited nonzero",),
            raw_capture=cap,
        )
    return parse_sta_output(cap)


def tool_available(binary: str) -> bool:
    return shutil.which(binary) is not None


# ---------------------------------------------------------------------------
# hermetic mock adapter
# ---------------------------------------------------------------------------

@dataclass
class MockAdapter:
    """Replays a scripted sequence of reports; counts calls."""

    reports: list[ToolReport]
    calls: int = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "MockAdapter":
        data = json.loads(Path(path).read_text())
        return cls(reports=[ToolReport.from_dict(d) for d in data])

    def __call__(self, *_args, **_kwargs) -> ToolReport:
        if self.calls >= len(self.reports):
            raise ScenarioExhausted(
                f"scenario has {len(self.reports)} reports, call {self.calls} requested")
        report = self.reports[self.calls]
        self.calls += 1
        return report


def run_mock(scenario: list[ToolReport] | MockAdapter, call_index: int) -> ToolReport:
    """Index into a scenario; bounds-checked."""
    reports = scenario.reports if isinstance(scenario, MockAdapter) else scenario
    if not 0 <= call_index < len(reports):
        raise ScenarioExhausted(f"no report at call index {call_index}")
    return reports[call_index]


# ---------------------------------------------------------------------------
# fixture design: 6-bit-wide, 32-entry synchronous FIFO
# ---------------------------------------------------------------------------

FIFO_RTL = """\
// Synchronous FIFO: 6-bit data, 32 entries, full/empty flags.
module fifo #(
    parameter WIDTH = 6,
    parameter DEPTH = 32,
    parameter ADDR  = 5
) (
    input  wire             clk,
    input  wire             rst,
    input  wire             wr_en,
    input  wire             rd_en,
    input  wire [WIDTH-1:0] din,
    output reg  [WIDTH-1:0] dout,
    output wire             full,
    output wire             empty
);
    reg [WIDTH-1:0] mem [0:DEPTH-1];
    reg [ADDR:0] wptr, rptr;

    assign full  = (wptr - rptr) == DEPTH[ADDR:0];
    assign empty = wptr == rptr;

    always @(posedge clk) begin
        if (rst) begin
            wptr <= 0;
            rptr <= 0;
            dout <= 0;
        end else begin
            if (wr_en && !full) begin
                mem[wptr[ADDR-1:0]] <= din;
                wptr <= wptr + 1;
            end
            if (rd_en && !empty) begin
                dout <= mem[rptr[ADDR-1:0]];
                rptr <= rptr + 1;
            end
        end
    end
endmodule
"""

FIFO_TB = """\
// Self-checking testbench for the 6-bit / 32-deep FIFO.
// Protocol: prints "TEST FAIL: <msg>" per failed check, then a final
// "TEST PASS" only if every check held.
`timescale 1ns/1ps
module fifo_tb;
    reg clk = 0, rst = 1, wr_en = 0, rd_en = 0;
    reg  [5:0] din = 0;
    wire [5:0] dout;
    wire full, empty;
    integer i, errors = 0;

    fifo dut (.clk(clk), .rst(rst), .wr_en(wr_en), .rd_en(rd_en),
              .din(din), .dout(dout), .full(full), .empty(empty));

    always #5 clk = ~clk;

    task check(input cond, input [255:0] msg);
        if (!cond) begin
            $display("TEST FAIL: %0s", msg);
            errors = errors + 1;
        end
    endtask

    initial begin
        @(posedge clk); rst = 0;
        @(posedge clk);
        check(empty, "fifo not empty after reset");
        check(!full, "fifo full after reset");

        // fill completely
        for (i = 0; i < 32; i = i + 1) begin
            wr_en = 1; din = i[5:0];
            @(posedge clk);
        end
        wr_en = 0;
        @(posedge clk);
        check(full, "fifo not full after 32 writes");

        // overflow attempt must be ignored
        wr_en = 1; din = 6'h3F;
        @(posedge clk);
        wr_en = 0;
        @(posedge clk);
        check(full, "overflow write corrupted full flag");

        // drain and compare
        for (i = 0; i < 32; i = i + 1) begin
            rd_en = 1;
            @(posedge clk);
            rd_en = 0;
            @(posedge clk);
            check(dout == i[5:0], "read data mismatch");
        end
        check(empty, "fifo not empty after drain");

        // underflow attempt must be ignored
        rd_en = 1;
        @(posedge clk);
        rd_en = 0;
        @(posedge clk);
        check(empty, "underflow read corrupted empty flag");

        if (errors == 0)
            $display("TEST PASS");
        $finish;
    end
endmodule
"""


def write_fifo_fixture(workdir: str | Path) -> list[str]:
    """Materialize the FIFO design and testbench; returns the file names."""
    wd = Path(workdir)
    (wd / "fifo.v").write_text(FIFO_RTL)
    (wd / "fifo_tb.v").write_text(FIFO_TB)
    return ["fifo.v", "fifo_tb.v"]
