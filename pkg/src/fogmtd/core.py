"""Domain model and per-request algorithms of the fog/cloud defense layer.

Everything here is integer arithmetic on a single mutable :class:`SystemState`.
The simulation driver in :mod:`fogmtd.engine` calls :func:`global_assign` and
:func:`local_assign` once per simulated second and then feeds each user demand
through :func:`send_request`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union


class ConfigError(ValueError):
    """Invalid simulation parameters."""


class ScenarioError(ValueError):
    """A scenario references something that does not exist or is malformed."""


class ContractViolation(RuntimeError):
    """An internal precondition was broken; indicates a routing bug."""


class IsolationUnavailable(RuntimeError):
    """No sleeping fog server is left to receive an attacker."""


def compute_f_cap(thresh: int, req_size: int) -> int:
    """Requests per second one fog server can serve: ``thresh / req_size``."""
    if not _is_int(thresh) or not _is_int(req_size) or thresh <= 0 or req_size <= 0:
        raise ConfigError(f"thresh={thresh!r} and req_size={req_size!r} must be positive integers")
    f_cap, rest = divmod(thresh, req_size)
    if rest:
        raise ConfigError(f"thresh={thresh} is not a multiple of req_size={req_size}")
    return f_cap


def compute_score(account: int, req_size: int) -> int:
    """Usage in megabits per second for ``account`` requests."""
    return account * req_size


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class SimParams:
    thresh: int
    req_size: int
    users: tuple[tuple[str, int], ...]  # (uid, max requests per second)
    fogs: tuple[tuple[str, int], ...]  # (fid, initial mode bit), in selection order

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def attack_fog_ids(self) -> tuple[str, ...]:
        return tuple(fid for fid, mode in self.fogs if mode == 0)

    @property
    def f_cap(self) -> int:
        return compute_f_cap(self.thresh, self.req_size)

    def validate(self, require_roles: bool = True) -> None:
        """Raise :class:`ConfigError` unless the parameters form a usable system.

        With ``require_roles`` the roster must contain at least one active and
        one sleeping fog server.
        """
        compute_f_cap(self.thresh, self.req_size)
        if not self.users:
            raise ConfigError("at least one user is required")
        uids = [uid for uid, _ in self.users]
        if len(set(uids)) != len(uids):
            raise ConfigError(f"duplicate uid in {uids}")
        for uid, max_rps in self.users:
            if not _is_int(max_rps) or max_rps < 1:
                raise ConfigError(f"user {uid}: max_rps must be a positive integer, got {max_rps!r}")
        fids = [fid for fid, _ in self.fogs]
        if len(set(fids)) != len(fids):
            raise ConfigError(f"duplicate fid in {fids}")
        for fid, mode in self.fogs:
            if mode not in (0, 1):
                raise ConfigError(f"fog {fid}: mode must be 0 or 1, got {mode!r}")
        if set(uids) & set(fids):
            raise ConfigError("user and fog identifiers must not overlap")
        if require_roles:
            modes = {mode for _, mode in self.fogs}
            if modes != {0, 1}:
                raise ConfigError("need at least one active (mode 1) and one sleeping (mode 0) fog server")


@dataclass
class UserRecord:
    uid: str
    max_rps: int
    limit: int
    account: Optional[int] = 0  # None once blacklisted
    score: Optional[int] = 0


@dataclass
class FogFlag:
    mode: int
    free: int = 1
    sum: int = 0


@dataclass
class FogServer:
    fid: str
    flag: FogFlag
    countfid: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Event:
    second: int
    kind: str
    uid: Optional[str] = None
    fid: Optional[str] = None
    amount: int = 0


# Outcome of serving on a single fog.

@dataclass(frozen=True)
class Completed:
    pass


@dataclass(frozen=True)
class Saturated:
    pass


@dataclass(frozen=True)
class Overflow:
    remainder: int
    forwarded: "RoutingOutcome"


ServeOutcome = Union[Completed, Saturated, Overflow]


# Outcome of routing one demand.

@dataclass(frozen=True)
class ServedByFog:
    fid: str


@dataclass(frozen=True)
class ForwardedToCloud:
    pass


@dataclass(frozen=True)
class AttackerIsolated:
    fid: str


@dataclass(frozen=True)
class Segment:
    role: str  # "fog" or "cloud"
    fid: Optional[str]
    count: int


@dataclass(frozen=True)
class SplitServed:
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class Absorbed:
    """Request from an already blacklisted user, swallowed by its attack fog."""

    fid: str


@dataclass(frozen=True)
class Rejected:
    """Attack batch dropped because no attack fog could be activated."""


RoutingOutcome = Union[ServedByFog, ForwardedToCloud, AttackerIsolated, SplitServed, Absorbed, Rejected]


def lowest_free_fog(state: "SystemState", exclude: Optional[str] = None) -> Optional[str]:
    """First active, non-full fog in roster order, skipping ``exclude``."""
    for fid, fog in state.fogs.items():
        if fid != exclude and fog.flag.mode == 1 and fog.flag.free == 1:
            return fid
    return None


@dataclass
class SystemState:
    params: SimParams
    f_cap: int
    users: dict[str, UserRecord]
    fogs: dict[str, FogServer]
    blacklist: list[str] = field(default_factory=list)
    cloud_served: int = 0
    attack_absorbed: dict[str, int] = field(default_factory=dict)
    rejected: int = 0
    attacker_host: dict[str, str] = field(default_factory=dict)
    event_log: list[Event] = field(default_factory=list)
    second: int = -1
    select: Optional[Callable[..., Optional[str]]] = None  # defaults to lowest_free_fog

    @classmethod
    def from_params(cls, params: SimParams, select=None) -> "SystemState":
        params.validate(require_roles=False)
        users = {
            uid: UserRecord(uid, max_rps, max_rps * params.req_size)
            for uid, max_rps in params.users
        }
        fogs = {fid: FogServer(fid, FogFlag(mode)) for fid, mode in params.fogs}
        return cls(params, params.f_cap, users, fogs, select=select)

    def log(self, kind: str, uid=None, fid=None, amount: int = 0) -> None:
        self.event_log.append(Event(self.second, kind, uid, fid, amount))

    def is_blacklisted(self, uid: str) -> bool:
        return self.users[uid].account is None

    def check(self) -> None:
        """Raise :class:`ContractViolation` if any structural invariant is broken."""
        for fog in self.fogs.values():
            total = sum(fog.countfid.values())
            if total != fog.flag.sum:
                raise ContractViolation(f"{fog.fid}: countfid total {total} != flag.sum {fog.flag.sum}")
            if not 0 <= fog.flag.sum <= self.f_cap:
                raise ContractViolation(f"{fog.fid}: sum {fog.flag.sum} outside [0, {self.f_cap}]")
            if any(v < 0 for v in fog.countfid.values()):
                raise ContractViolation(f"{fog.fid}: negative countfid entry")
            if (fog.flag.free == 0) != (fog.flag.sum == self.f_cap):
                raise ContractViolation(f"{fog.fid}: free={fog.flag.free} inconsistent with sum={fog.flag.sum}")
        for user in self.users.values():
            if (user.account is None) != (user.uid in self.blacklist):
                raise ContractViolation(f"{user.uid}: account/blacklist mismatch")
            if user.account is not None:
                if user.account < 0 or user.score != user.account * self.params.req_size:
                    raise ContractViolation(f"{user.uid}: score {user.score} != account {user.account} x req_size")
            if user.limit != user.max_rps * self.params.req_size:
                raise ContractViolation(f"{user.uid}: limit out of sync with max_rps")
        for uid in self.blacklist:
            if uid not in self.attacker_host:
                raise ContractViolation(f"{uid} blacklisted without a host fog")


def global_assign(state: SystemState) -> None:
    """Start-of-second reset of user quotas and fog flags.

    Blacklisted users keep ``account = None``; isolation lasts for the run.
    """
    req_size = state.params.req_size
    for user in state.users.values():
        user.limit = user.max_rps * req_size
        if user.account is not None:
            user.account = 0
            user.score = 0
    for fog in state.fogs.values():
        fog.flag.sum = 0
        fog.flag.free = 1
    state.cloud_served = 0
    state.attack_absorbed = {}
    state.rejected = 0


def local_assign(fog: FogServer, blacklist=()) -> None:
    for uid in list(fog.countfid):
        if uid in blacklist:
            del fog.countfid[uid]
        else:
            fog.countfid[uid] = 0


def send_request(state: SystemState, origin: Optional[str], uid: str, need: int) -> RoutingOutcome:
    """Route ``need`` requests of ``uid``.

    ``origin`` is None for a request straight from the user, otherwise the fid
    of the fog forwarding an overflow remainder. Forwarded remainders skip the
    quota check.
    """
    if uid not in state.users:
        raise ScenarioError(f"unknown uid {uid!r}")
    if not _is_int(need) or need < 1:
        raise ScenarioError(f"need must be a positive integer, got {need!r}")

    if origin is None and state.is_blacklisted(uid):
        return _absorb(state, uid, need)

    fid = (state.select or lowest_free_fog)(state, exclude=origin)
    if fid is None:
        state.cloud_served += need
        state.log("cloud", uid, None, need)
        return ForwardedToCloud()
    if origin is None:
        return handle_request(state, fid, uid, need)
    out = serve(state, fid, uid, need)
    return _as_routing(fid, need, out)


def _absorb(state: SystemState, uid: str, need: int) -> Absorbed:
    host = state.attacker_host[uid]
    state.attack_absorbed[uid] = state.attack_absorbed.get(uid, 0) + need
    state.log("absorb", uid, host, need)
    return Absorbed(host)


def _as_routing(fid: str, need: int, out: ServeOutcome) -> RoutingOutcome:
    if not isinstance(out, Overflow):
        return ServedByFog(fid)
    segments = [Segment("fog", fid, need - out.remainder)]
    nxt = out.forwarded
    if isinstance(nxt, ServedByFog):
        segments.append(Segment("fog", nxt.fid, out.remainder))
    elif isinstance(nxt, ForwardedToCloud):
        segments.append(Segment("cloud", None, out.remainder))
    else:
        segments.extend(nxt.segments)
    return SplitServed(tuple(segments))


def handle_request(state: SystemState, fid: str, uid: str, need: int) -> RoutingOutcome:
    """Quota check for a user request arriving at fog ``fid``."""
    fog = state.fogs[fid]
    if fog.flag.mode != 1 or fog.flag.free != 1:
        raise ContractViolation(f"handle_request on {fid} with flag {fog.flag}")
    user = state.users[uid]
    if user.account is None:
        return _absorb(state, uid, need)

    user.account += need
    user.score = compute_score(user.account, state.params.req_size)
    state.log("handle", uid, fid, need)
    if user.score > user.limit:
        state.rejected += need
        state.log("reject", uid, fid, need)
        try:
            attack_fid = activate_attack_fog(state, uid)
        except IsolationUnavailable:
            # the dropped batch must not count against the quota
            user.account -= need
            user.score = compute_score(user.account, state.params.req_size)
            state.log("isolation-unavailable", uid, None, need)
            return Rejected()
        return AttackerIsolated(attack_fid)
    return _as_routing(fid, need, serve(state, fid, uid, need))


def serve(state: SystemState, fid: str, uid: str, need: int) -> ServeOutcome:
    fog = state.fogs[fid]
    if fog.flag.mode != 1 or fog.flag.free != 1:
        raise ContractViolation(f"serve on {fid} with flag {fog.flag}")
    fog.countfid[uid] = fog.countfid.get(uid, 0) + need
    total = sum(fog.countfid.values())
    f_cap = state.f_cap
    if total == f_cap:
        fog.flag.sum = total
        fog.flag.free = 0
        state.log("serve", uid, fid, need)
        return Saturated()
    if total > f_cap:
        rem = total - f_cap
        fog.countfid[uid] -= rem
        fog.flag.sum = f_cap
        fog.flag.free = 0
        state.log("serve", uid, fid, need - rem)
        state.log("overflow", uid, fid, rem)
        forwarded = send_request(state, fid, uid, rem)
        return Overflow(rem, forwarded)
    fog.flag.sum = total
    state.log("serve", uid, fid, need)
    return Completed()


def activate_attack_fog(state: SystemState, uid: str) -> str:
    """Wake the first sleeping fog, hand it the attacker, return its fid."""
    for fid, fog in state.fogs.items():
        if fog.flag.mode == 0:
            break
    else:
        raise IsolationUnavailable(f"no sleeping fog server to isolate {uid}")
    fog.flag.mode = 1
    state.log("activate", uid, fid)
    attacker_isolation(state, uid, fid)
    return fid


def attacker_isolation(state: SystemState, uid: str, fid: str) -> None:
    fog = state.fogs[fid]
    if uid in state.blacklist:
        state.log("duplicate-isolation", uid, fid)
        return
    if fog.flag.mode != 1:
        raise ContractViolation(f"isolation on {fid} which was not activated")
    state.blacklist.append(uid)
    user = state.users[uid]
    user.account = None
    user.score = None
    state.attacker_host[uid] = fid
    state.log("isolate", uid, fid)
    fog.flag.mode = 0
    state.log("deactivate", uid, fid)
