"""Per-second simulation loop and workload generation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (
    ConfigError,
    ScenarioError,
    SimParams,
    SystemState,
    global_assign,
    local_assign,
    lowest_free_fog,
    send_request,
)


class EngineError(RuntimeError):
    pass


def select_fog(state: SystemState, exclude: Optional[str] = None) -> Optional[str]:
    """Lowest active, free fog in roster order other than ``exclude``."""
    return lowest_free_fog(state, exclude)


@dataclass(frozen=True)
class Tick:
    second: int
    demands: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class Scenario:
    params: SimParams
    schedule: tuple[Tick, ...]
    seed: int = 0

    def validate(self) -> None:
        self.params.validate()
        if not self.schedule:
            raise ScenarioError("schedule is empty")
        uids = {uid for uid, _ in self.params.users}
        for expected, tick in enumerate(self.schedule):
            if tick.second != expected:
                raise ScenarioError(f"tick {expected} has second={tick.second}; seconds must run 0, 1, 2, ...")
            for uid, need in tick.demands:
                if uid not in uids:
                    raise ScenarioError(f"second {tick.second}: unknown uid {uid!r}")
                if not isinstance(need, int) or isinstance(need, bool) or need < 1:
                    raise ScenarioError(f"second {tick.second}: need for {uid} must be >= 1, got {need!r}")


@dataclass
class TickMetrics:
    second: int
    served_per_fog: dict[str, int]
    cloud_served: int
    absorbed: int
    rejected_at_detection: int
    blacklist_events: list[tuple[str, str]]
    blacklist: list[str]
    flag_trace: dict[str, list[int]]
    mode_trace: dict[str, list[int]]
    events: list = field(default_factory=list)

    @property
    def fog_served(self) -> int:
        return sum(self.served_per_fog.values())


def tick(state: SystemState, entry: Tick, check: bool = False) -> TickMetrics:
    """Advance ``state`` by one second and process ``entry.demands`` in order.

    With ``check`` the structural invariants are asserted after every demand.
    """
    if entry.second != state.second + 1:
        raise EngineError(f"expected second {state.second + 1}, got {entry.second}")
    state.second = entry.second
    first_event = len(state.event_log)

    global_assign(state)
    blacklisted = set(state.blacklist)
    for fog in state.fogs.values():
        local_assign(fog, blacklisted)

    flag_trace = {fid: [] for fid in state.fogs}
    mode_trace = {fid: [fog.flag.mode] for fid, fog in state.fogs.items()}
    for uid, need in entry.demands:
        mark = len(state.event_log)
        send_request(state, None, uid, need)
        for ev in state.event_log[mark:]:
            if ev.kind == "activate":
                mode_trace[ev.fid].append(1)
            elif ev.kind == "deactivate":
                mode_trace[ev.fid].append(0)
        for fid, fog in state.fogs.items():
            flag_trace[fid].append(fog.flag.sum)
        if check:
            state.check()

    events = state.event_log[first_event:]
    return TickMetrics(
        second=entry.second,
        served_per_fog={fid: fog.flag.sum for fid, fog in state.fogs.items()},
        cloud_served=state.cloud_served,
        absorbed=sum(state.attack_absorbed.values()),
        rejected_at_detection=state.rejected,
        blacklist_events=[(ev.uid, ev.fid) for ev in events if ev.kind == "isolate"],
        blacklist=list(state.blacklist),
        flag_trace=flag_trace,
        mode_trace=mode_trace,
        events=events,
    )


def run(scenario: Scenario, check: bool = False, select=None) -> list[TickMetrics]:
    scenario.validate()
    state = SystemState.from_params(scenario.params, select=select)
    return [tick(state, entry, check=check) for entry in scenario.schedule]


def run_with_state(scenario: Scenario, check: bool = False, select=None):
    """Like :func:`run` but also returns the final :class:`SystemState`."""
    scenario.validate()
    state = SystemState.from_params(scenario.params, select=select)
    metrics = [tick(state, entry, check=check) for entry in scenario.schedule]
    return metrics, state


@dataclass(frozen=True)
class WorkloadSpec:
    """Recipe for a synthetic schedule.

    ``demand`` is either a constant per-user need or an inclusive ``(lo, hi)``
    range sampled uniformly each second. Injections replace the named user's
    regular entry for that second.
    """

    params: SimParams
    duration: int
    demand: Union[int, tuple[int, int]]
    injections: tuple[tuple[str, int, int], ...] = ()  # (uid, second, need)
    shuffle: bool = False


def generate_workload(spec: WorkloadSpec, seed: int = 0) -> Scenario:
    params = spec.params
    max_rps = dict(params.users)
    if spec.duration < 1:
        raise ConfigError(f"duration must be >= 1, got {spec.duration}")
    if isinstance(spec.demand, int):
        lo = hi = spec.demand
    else:
        lo, hi = spec.demand
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad demand range {spec.demand!r}")
    inject = {}
    for uid, second, need in spec.injections:
        if uid not in max_rps:
            raise ScenarioError(f"injection references unknown uid {uid!r}")
        if need <= max_rps[uid]:
            raise ScenarioError(f"injection for {uid} needs {need} <= max_rps {max_rps[uid]}; not an attack")
        if not 0 <= second < spec.duration:
            raise ScenarioError(f"injection second {second} outside 0..{spec.duration - 1}")
        inject[(uid, second)] = need

    rng = random.Random(seed)
    uids = [uid for uid, _ in params.users]
    schedule = []
    for second in range(spec.duration):
        order = list(uids)
        if spec.shuffle:
            rng.shuffle(order)
        demands = []
        for uid in order:
            need = lo if lo == hi else rng.randint(lo, hi)
            demands.append((uid, inject.get((uid, second), need)))
        schedule.append(Tick(second, tuple(demands)))
    return Scenario(params, tuple(schedule), seed)


def random_small_scenario(rng: random.Random) -> Scenario:
    """Small randomized scenario: <= 3 fogs, <= 6 users, <= 8 demands/s, <= 5 s.

    Capacities and quotas are kept small so that overflow, cloud forwarding
    and attacker isolation all occur regularly.
    """
    req_size = rng.choice([1, 2, 5, 10])
    thresh = req_size * rng.randint(1, 40)
    n_fogs = rng.randint(2, 3)
    modes = [1, 0] + [rng.randint(0, 1) for _ in range(n_fogs - 2)]
    rng.shuffle(modes)
    fogs = tuple((f"F{i + 1}", m) for i, m in enumerate(modes))
    n_users = rng.randint(1, 6)
    users = tuple((f"U{i + 1}", rng.randint(1, 30)) for i in range(n_users))
    params = SimParams(thresh, req_size, users, fogs)
    schedule = []
    for second in range(rng.randint(1, 5)):
        demands = tuple(
            (rng.choice(users)[0], rng.randint(1, 35)) for _ in range(rng.randint(0, 8))
        )
        schedule.append(Tick(second, demands))
    return Scenario(params, tuple(schedule), rng.randint(0, 2**31 - 1))
