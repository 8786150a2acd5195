"""Naive sequential replay of the four algorithms, used as a cross-check.

This module deliberately shares no code with :mod:`fogmtd.core`: it works on
plain index-addressed lists, recomputes every sum from scratch and scans fog
servers linearly, exactly as the pseudocode reads. It exists only to be
compared against :func:`fogmtd.engine.run`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

NULL = None


class _Replay:
    def __init__(self, thresh, req_size, users, fogs):
        self.req_size = req_size
        self.f_cap = thresh // req_size
        self.uids = [u for u, _ in users]
        self.fids = [f for f, _ in fogs]
        self.max = [m for _, m in users]
        self.limit = [0] * len(users)
        self.account = [0] * len(users)
        self.score = [0] * len(users)
        self.mode = [m for _, m in fogs]
        self.free = [1] * len(fogs)
        self.sum = [0] * len(fogs)
        self.countfid = [[0] * len(users) for _ in fogs]
        self.blacklist: list[int] = []
        self.host = {}
        self.cloud = 0
        self.absorbed = 0
        self.rejected = 0

    def global_assign(self):
        for i in range(len(self.uids)):
            if self.account[i] is not NULL:
                self.account[i] = 0
            self.limit[i] = self.max[i] * self.req_size
        for f in range(len(self.fids)):
            self.sum[f] = 0
            self.free[f] = 1
        self.cloud = 0
        self.absorbed = 0
        self.rejected = 0

    def local_assign(self):
        for f in range(len(self.fids)):
            for i in range(len(self.uids)):
                self.countfid[f][i] = 0

    def send_request(self, uid, need, from_fog=None):
        if from_fog is None and self.account[uid] is NULL:
            self.absorbed += need
            return
        chosen = None
        for f in range(len(self.fids)):
            if f == from_fog:
                continue
            if self.mode[f] == 1 and self.free[f] == 1:
                chosen = f
                break
        if chosen is None:
            self.cloud += need
        elif from_fog is None:
            self.handle_request(chosen, uid, need)
        else:
            self.serve(chosen, uid, need)

    def handle_request(self, fid, uid, need):
        if self.account[uid] is not NULL:
            self.account[uid] = self.account[uid] + need
            self.score[uid] = self.account[uid] * self.req_size
            if self.score[uid] > self.limit[uid]:
                self.activate_attackfog(uid, need)
            else:
                self.serve(fid, uid, need)

    def serve(self, fid, uid, need):
        self.countfid[fid][uid] = self.countfid[fid][uid] + need
        s = 0
        for i in range(len(self.uids)):
            s = s + self.countfid[fid][i]
        if s == self.f_cap:
            self.sum[fid] = s
            self.free[fid] = 0
        elif s > self.f_cap:
            rem = s - self.f_cap
            self.countfid[fid][uid] = self.countfid[fid][uid] - rem
            self.sum[fid] = self.f_cap
            self.free[fid] = 0
            self.send_request(uid, rem, from_fog=fid)
        else:
            self.sum[fid] = s

    def activate_attackfog(self, uid, need):
        self.rejected += need
        for f in range(len(self.fids)):
            if self.mode[f] == 0:
                self.mode[f] = 1
                self.attacker_isolation(uid, f)
                return
        self.account[uid] = self.account[uid] - need

    def attacker_isolation(self, uid, fid):
        self.blacklist.append(uid)
        self.account[uid] = NULL
        self.host[uid] = fid
        self.mode[fid] = 0


@dataclass
class ReplaySecond:
    second: int
    flag_trace: dict
    cloud: int
    absorbed: int
    rejected: int
    blacklist: list


def replay(scenario) -> list[ReplaySecond]:
    """Replay ``scenario`` and return per-second flag traces and totals."""
    p = scenario.params
    r = _Replay(p.thresh, p.req_size, list(p.users), list(p.fogs))
    index = {u: i for i, u in enumerate(r.uids)}
    out = []
    for tick in scenario.schedule:
        r.global_assign()
        r.local_assign()
        trace = {fid: [] for fid in r.fids}
        for uid, need in tick.demands:
            r.send_request(index[uid], need)
            for f, fid in enumerate(r.fids):
                trace[fid].append(r.sum[f])
        out.append(ReplaySecond(
            tick.second, trace, r.cloud, r.absorbed, r.rejected,
            [r.uids[i] for i in r.blacklist],
        ))
    return out


@dataclass
class Divergence:
    second: int
    demand_index: Optional[int]
    what: str
    engine: object
    oracle: object

    def __str__(self):
        where = f"second {self.second}"
        if self.demand_index is not None:
            where += f", demand #{self.demand_index}"
        return f"{where}: {self.what} engine={self.engine!r} oracle={self.oracle!r}"


def first_divergence(scenario, metrics) -> Optional[Divergence]:
    """Compare engine ``metrics`` with a fresh replay; None when they agree."""
    expected = replay(scenario)
    if len(expected) != len(metrics):
        return Divergence(-1, None, "tick count", len(metrics), len(expected))
    for want, got in zip(expected, metrics):
        n = len(next(iter(want.flag_trace.values()), []))
        for k in range(n):
            for fid, values in want.flag_trace.items():
                have = got.flag_trace.get(fid, [])
                if k >= len(have) or have[k] != values[k]:
                    return Divergence(want.second, k, f"{fid}.sum",
                                      have[k] if k < len(have) else None, values[k])
        for what, a, b in (
            ("cloud", got.cloud_served, want.cloud),
            ("absorbed", got.absorbed, want.absorbed),
            ("rejected", got.rejected_at_detection, want.rejected),
            ("blacklist", list(got.blacklist), want.blacklist),
        ):
            if a != b:
                return Divergence(want.second, None, what, a, b)
    return None
