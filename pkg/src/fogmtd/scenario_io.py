"""Scenario files, built-in fixtures and metrics export.

Scenario documents are line oriented::

    format=1
    [params]
    thresh = 5000
    req_size = 10
    users = U1:100, U2:100
    fogs = F1:1, F2:0, F3:1
    seed = 0            # optional
    [schedule]
    0 U1 50             # second uid need, in arrival order
    1 -                 # an idle second

Instead of ``[schedule]`` a ``[workload]`` section may describe a generated
schedule with ``duration``, ``demand`` (``50`` or ``40..100``), optional
``inject = U2@0:200, ...`` and ``shuffle = yes|no``.
"""

from __future__ import annotations

import re
from importlib import resources
from typing import Optional

from .core import ConfigError, ScenarioError, SimParams
from .engine import Scenario, Tick, TickMetrics, WorkloadSpec, generate_workload

FORMAT_LINE = "format=1"

FIXTURES = ("case-a", "case-b", "case-c", "case-d", "case-2", "eval-fig12")

_SECTION_KEYS = {
    "params": {"thresh", "req_size", "users", "fogs", "seed"},
    "workload": {"duration", "demand", "inject", "shuffle"},
}
_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")


class ScenarioParseError(ScenarioError):
    def __init__(self, lineno: Optional[int], msg: str, source: str = "<scenario>"):
        self.lineno = lineno
        self.msg = msg
        where = f"{source}:{lineno}" if lineno is not None else source
        super().__init__(f"{where}: {msg}")


def _int(text: str, what: str, lineno: int, source: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioParseError(lineno, f"{what} must be an integer, got {text!r}", source) from None


def _pairs(text: str, what: str, lineno: int, source: str) -> list[tuple[str, int]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        name, sep, value = item.partition(":")
        if not sep or not _ID.match(name.strip()):
            raise ScenarioParseError(lineno, f"bad {what} entry {item!r}, expected ID:INT", source)
        out.append((name.strip(), _int(value.strip(), f"{what} value", lineno, source)))
    return out


def parse_scenario(text: str, seed: Optional[int] = None, source: str = "<scenario>") -> Scenario:
    """Parse and fully validate a scenario document.

    ``seed`` overrides the document's seed, which only matters for
    ``[workload]`` sections.
    """
    fail = lambda lineno, msg: ScenarioParseError(lineno, msg, source)  # noqa: E731

    section = None
    seen_format = False
    values: dict[str, tuple[str, int]] = {}
    sections_seen: dict[str, int] = {}
    schedule_lines: list[tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_format:
            if line.replace(" ", "") != FORMAT_LINE:
                raise fail(lineno, f"expected {FORMAT_LINE!r} declaration, got {line!r}")
            seen_format = True
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise fail(lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in ("params", "schedule", "workload"):
                raise fail(lineno, f"unknown section [{section}]")
            if section in sections_seen:
                raise fail(lineno, f"duplicate section [{section}]")
            sections_seen[section] = lineno
            continue
        if section is None:
            raise fail(lineno, "content before the first section")
        if section == "schedule":
            schedule_lines.append((lineno, line))
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise fail(lineno, f"expected 'key = value', got {line!r}")
        if key not in _SECTION_KEYS[section]:
            raise fail(lineno, f"unknown key {key!r} in [{section}]")
        qualified = f"{section}.{key}"
        if qualified in values:
            raise fail(lineno, f"duplicate key {key!r}")
        values[qualified] = (value.strip(), lineno)

    if not seen_format:
        raise fail(None, f"missing {FORMAT_LINE!r} declaration")
    if "params" not in sections_seen:
        raise fail(None, "missing [params] section")
    for key in ("thresh", "req_size", "users", "fogs"):
        if f"params.{key}" not in values:
            raise fail(sections_seen["params"], f"missing key {key!r} in [params]")

    thresh_text, thresh_line = values["params.thresh"]
    req_text, req_line = values["params.req_size"]
    thresh = _int(thresh_text, "thresh", thresh_line, source)
    req_size = _int(req_text, "req_size", req_line, source)
    users_text, users_line = values["params.users"]
    fogs_text, fogs_line = values["params.fogs"]
    users = _pairs(users_text, "user", users_line, source)
    fogs = _pairs(fogs_text, "fog", fogs_line, source)
    doc_seed = 0
    if "params.seed" in values:
        seed_text, seed_line = values["params.seed"]
        doc_seed = _int(seed_text, "seed", seed_line, source)
    if seed is None:
        seed = doc_seed

    params = SimParams(thresh, req_size, tuple(users), tuple(fogs))
    try:
        params.f_cap
    except ConfigError as exc:
        raise fail(thresh_line, str(exc)) from None
    uids = [u for u, _ in users]
    fids = [f for f, _ in fogs]
    for name, seq, lineno in (("uid", uids, users_line), ("fid", fids, fogs_line)):
        dup = sorted({x for x in seq if seq.count(x) > 1})
        if dup:
            raise fail(lineno, f"duplicate {name} {', '.join(dup)}")
    try:
        params.validate()
    except ConfigError as exc:
        lineno = fogs_line if "fog" in str(exc) else users_line
        raise fail(lineno, str(exc)) from None

    has_workload = "workload" in sections_seen
    if has_workload and "schedule" in sections_seen:
        raise fail(sections_seen["schedule"], "[schedule] and [workload] are mutually exclusive")
    if has_workload:
        return _build_workload(values, sections_seen["workload"], params, seed, source)

    if "schedule" not in sections_seen:
        raise fail(None, "missing [schedule] section")
    if not schedule_lines:
        raise fail(sections_seen["schedule"], "empty schedule")

    known = set(uids)
    by_second: dict[int, list[tuple[str, int]]] = {}
    last = -1
    for lineno, line in schedule_lines:
        parts = line.split()
        if len(parts) == 2 and parts[1] == "-":
            second = _int(parts[0], "second", lineno, source)
            uid = None
        elif len(parts) == 3:
            second = _int(parts[0], "second", lineno, source)
            uid = parts[1]
            need = _int(parts[2], "need", lineno, source)
        else:
            raise fail(lineno, f"expected 'second uid need', got {line!r}")
        if second < 0:
            raise fail(lineno, f"second must be >= 0, got {second}")
        if second < last:
            raise fail(lineno, f"second {second} goes backwards (previous line was second {last})")
        last = second
        entries = by_second.setdefault(second, [])
        if uid is None:
            continue
        if uid not in known:
            raise fail(lineno, f"unknown uid {uid!r}")
        if need < 1:
            raise fail(lineno, f"need must be >= 1, got {need}")
        entries.append((uid, need))

    schedule = tuple(Tick(s, tuple(by_second.get(s, ()))) for s in range(last + 1))
    scenario = Scenario(params, schedule, seed)
    scenario.validate()
    return scenario


def _build_workload(values, header_line, params, seed, source) -> Scenario:
    def need_key(key):
        if f"workload.{key}" not in values:
            raise ScenarioParseError(header_line, f"missing key {key!r} in [workload]", source)
        return values[f"workload.{key}"]

    text, lineno = need_key("duration")
    duration = _int(text, "duration", lineno, source)
    text, lineno = need_key("demand")
    lo, sep, hi = text.partition("..")
    demand = (_int(lo, "demand", lineno, source), _int(hi, "demand", lineno, source)) if sep \
        else _int(text, "demand", lineno, source)
    injections = []
    inject_line = header_line
    if "workload.inject" in values:
        text, inject_line = values["workload.inject"]
        for item in filter(None, (x.strip() for x in text.split(","))):
            m = re.match(r"^(\S+)@(\d+):(\d+)$", item)
            if not m:
                raise ScenarioParseError(inject_line, f"bad injection {item!r}, expected UID@SECOND:NEED", source)
            injections.append((m.group(1), int(m.group(2)), int(m.group(3))))
    shuffle = False
    if "workload.shuffle" in values:
        text, lineno = values["workload.shuffle"]
        if text not in ("yes", "no"):
            raise ScenarioParseError(lineno, f"shuffle must be yes or no, got {text!r}", source)
        shuffle = text == "yes"
    spec = WorkloadSpec(params, duration, demand, tuple(injections), shuffle)
    try:
        scenario = generate_workload(spec, seed)
    except ScenarioError as exc:
        raise ScenarioParseError(inject_line, str(exc), source) from None
    except ConfigError as exc:
        raise ScenarioParseError(header_line, str(exc), source) from None
    scenario.validate()
    return scenario


def render_scenario(scenario: Scenario) -> str:
    """Write ``scenario`` as a document that :func:`parse_scenario` reads back."""
    p = scenario.params
    lines = [
        FORMAT_LINE,
        "[params]",
        f"thresh = {p.thresh}",
        f"req_size = {p.req_size}",
        "users = " + ", ".join(f"{u}:{m}" for u, m in p.users),
        "fogs = " + ", ".join(f"{f}:{m}" for f, m in p.fogs),
        f"seed = {scenario.seed}",
        "",
        "[schedule]",
    ]
    for tick in scenario.schedule:
        if not tick.demands:
            lines.append(f"{tick.second} -")
        for uid, need in tick.demands:
            lines.append(f"{tick.second} {uid} {need}")
    return "\n".join(lines) + "\n"


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise ScenarioError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("fogmtd").joinpath("fixtures", f"{name}.scn").read_text()


def builtin_fixture(name: str) -> Scenario:
    return parse_scenario(fixture_text(name), source=f"{name}.scn")


# Flag rows as printed for each worked case: values in the order they appear,
# with repeated values collapsed.
PAPER_TABLES: dict[str, dict[str, list[int]]] = {
    "case-a": {
        "F1.mode": [1], "F1.free": [1], "F1.sum": [0, 50, 140, 180, 230, 260, 360],
        "F2.mode": [0], "F2.free": [1], "F2.sum": [0],
        "F3.mode": [1], "F3.free": [1], "F3.sum": [0],
    },
    "case-b": {
        "F1.mode": [1], "F1.free": [1, 0], "F1.sum": [0, 100, 200, 250, 300, 400, 500],
        "F2.mode": [0], "F2.free": [1], "F2.sum": [0],
        "F3.mode": [1], "F3.free": [1], "F3.sum": [0],
    },
    "case-c": {
        "F1.mode": [1], "F1.free": [1, 0], "F1.sum": [0, 100, 185, 260, 355, 450, 500],
        "F2.mode": [0], "F2.free": [1], "F2.sum": [0],
        "F3.mode": [1], "F3.free": [1], "F3.sum": [0, 50],
    },
    "case-d": {
        "F1.mode": [1], "F1.free": [1, 0], "F1.sum": [0, 100, 200, 285, 380, 480, 500],
        "F2.mode": [0], "F2.free": [1], "F2.sum": [0],
        "F3.mode": [1], "F3.free": [1, 0], "F3.sum": [0, 85, 185, 285, 360, 460, 500],
    },
    "case-2": {
        "F1.mode": [1], "F1.free": [1], "F1.sum": [0, 100, 150, 200, 300],
        "F2.mode": [0, 1, 0], "F2.free": [1], "F2.sum": [0],
        "F3.mode": [1], "F3.free": [1], "F3.sum": [0],
    },
}


def _collapse(values: list[int]) -> list[int]:
    out: list[int] = []
    for v in values:
        if not out or out[-1] != v:
            out.append(v)
    return out


def flag_rows(metrics: TickMetrics, f_cap: int) -> dict[str, list[int]]:
    """Per-fog mode/free/sum rows for one second, in the layout of PAPER_TABLES.

    Repeated isolations through the same attack fog show as one 0,1,0 toggle.
    """
    rows = {}
    for fid, trace in metrics.flag_trace.items():
        mode = list(metrics.mode_trace[fid])
        while len(mode) > 3 and mode[-4:-2] == mode[-2:]:
            mode = mode[:-2]
        rows[f"{fid}.mode"] = mode
        rows[f"{fid}.free"] = _collapse([1] + [0 if s == f_cap else 1 for s in trace])
        rows[f"{fid}.sum"] = _collapse([0] + list(trace))
    return rows


def export_metrics(metrics: list[TickMetrics], format: str = "rows") -> str:
    if format == "rows":
        fids = list(metrics[0].served_per_fog) if metrics else []
        lines = [FORMAT_LINE, ",".join(["second", *fids, "cloud", "absorbed", "rejected", "blacklist"])]
        for m in metrics:
            cells = [m.second, *(m.served_per_fog[f] for f in fids), m.cloud_served,
                     m.absorbed, m.rejected_at_detection, len(m.blacklist)]
            lines.append(",".join(str(c) for c in cells))
    elif format == "events":
        lines = [FORMAT_LINE, "second,kind,uid,fid,amount"]
        for m in metrics:
            for ev in m.events:
                lines.append(f"{ev.second},{ev.kind},{ev.uid or ''},{ev.fid or ''},{ev.amount}")
    else:
        raise ValueError(f"unknown export format {format!r}")
    return "\n".join(lines) + "\n"
