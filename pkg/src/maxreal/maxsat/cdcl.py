"""A compact CDCL SAT solver.

Watched literals, first-UIP learning with local minimisation, VSIDS with a
lazy binary heap, Luby restarts, phase saving and LBD-based clause database
reduction.  Clauses may be added between calls to `solve` (the solver
returns to decision level 0 first), which the MaxSAT search relies on.

Literals are DIMACS integers at the interface; internally variable v maps
to 2*(v-1) (positive) and 2*(v-1)+1 (negative).
"""

from __future__ import annotations

import heapq
import time
from typing import Dict, Iterable, List, Optional


def _luby(y: float, x: int) -> float:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class Solver:
    def __init__(self, num_vars: int = 0):
        self.n = 0
        self.val: List[int] = []        # per literal: 1 true, -1 false, 0 unassigned
        self.level: List[int] = []
        self.reason: List[Optional[list]] = []
        self.activity: List[float] = []
        self.phase: List[int] = []      # saved polarity bit (0 positive, 1 negative)
        self.seen: List[int] = []
        self.watches: List[List[list]] = []
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.clauses: List[list] = []
        self.learnts: List[list] = []
        self.lbd: Dict[int, int] = {}
        self.heap: List[tuple] = []
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.max_learnts = 4000.0
        self.restart_base = 100
        self.restarts = 0
        self._model: Optional[List[bool]] = None
        self.ensure_vars(num_vars)

    # -- setup -------------------------------------------------------------

    def ensure_vars(self, n: int):
        while self.n < n:
            self.n += 1
            self.val.extend((0, 0))
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(1)
            self.seen.append(0)
            self.watches.append([])
            self.watches.append([])
            heapq.heappush(self.heap, (0.0, self.n - 1))

    def new_var(self) -> int:
        self.ensure_vars(self.n + 1)
        return self.n

    def set_phase(self, dimacs_lit: int):
        """Preferred polarity for the first decision on this variable."""
        self.ensure_vars(abs(dimacs_lit))
        self.phase[abs(dimacs_lit) - 1] = 0 if dimacs_lit > 0 else 1

    @staticmethod
    def _enc(lit: int) -> int:
        return 2 * (lit - 1) if lit > 0 else 2 * (-lit - 1) + 1

    def add_clause(self, lits: Iterable[int]) -> bool:
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        enc = []
        seen = set()
        for l in lits:
            if l == 0:
                raise ValueError("0 is not a literal")
            self.ensure_vars(abs(l))
            e = self._enc(l)
            if e ^ 1 in seen:
                return True  # tautology
            if e not in seen:
                seen.add(e)
                enc.append(e)
        val = self.val
        if any(val[e] == 1 and self.level[e >> 1] == 0 for e in enc):
            return True
        enc = [e for e in enc if not (val[e] == -1 and self.level[e >> 1] == 0)]
        if not enc:
            self.ok = False
            return False
        if len(enc) == 1:
            if val[enc[0]] == 0:
                self._assign(enc[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self.clauses.append(enc)
        self.watches[enc[0]].append(enc)
        self.watches[enc[1]].append(enc)
        return True

    # -- core --------------------------------------------------------------

    def _assign(self, lit: int, reason: Optional[list]):
        v = lit >> 1
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Optional[list]:
        val = self.val
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        props = 0
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            props += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        found = True
                        break
                if found:
                    continue
                ws[j] = c
                j += 1
                if val[first] == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.qhead = len(trail)
                    self.propagations += props
                    return c
                v = first >> 1
                val[first] = 1
                val[first ^ 1] = -1
                level[v] = dl
                reason[v] = c
                trail.append(first)
            del ws[j:]
        self.qhead = qhead
        self.propagations += props
        return None

    def _bump(self, v: int):
        a = self.activity[v] + self.var_inc
        self.activity[v] = a
        if a > 1e100:
            self.activity = [x * 1e-100 for x in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(self.n) if self.val[2 * u] == 0]
            heapq.heapify(self.heap)
            return
        if self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-a, v))

    def _analyze(self, confl: list):
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        to_clear = []
        while True:
            start = 0 if p == -1 else 1
            for k in range(start, len(confl)):
                q = confl[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = 1
                    to_clear.append(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        # local minimisation: drop literals implied by the rest of the clause
        if len(learnt) > 2:
            kept = [learnt[0]]
            for q in learnt[1:]:
                r = reason[q >> 1]
                if r is None:
                    kept.append(q)
                    continue
                if all(seen[x >> 1] or level[x >> 1] == 0 for x in r[1:]):
                    continue
                kept.append(q)
            learnt = kept
        for v in to_clear:
            seen[v] = 0
        if len(learnt) == 1:
            bt = 0
        else:
            best = 1
            for k in range(2, len(learnt)):
                if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                    best = k
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = level[learnt[1] >> 1]
        lbd = len({level[q >> 1] for q in learnt})
        return learnt, bt, lbd

    def _cancel_until(self, lvl: int):
        if len(self.trail_lim) <= lvl:
            return
        val = self.val
        phase = self.phase
        reason = self.reason
        activity = self.activity
        heap = self.heap
        start = self.trail_lim[lvl]
        for k in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[k]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = None
            phase[v] = lit & 1
            heapq.heappush(heap, (-activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if len(heap) > 4 * self.n + 10000:
            self.heap = [(-activity[u], u) for u in range(self.n) if val[2 * u] == 0]
            heapq.heapify(self.heap)

    def _pick(self) -> int:
        heap = self.heap
        val = self.val
        activity = self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -a == activity[v]:
                return 2 * v + self.phase[v]
        # stale entries exhausted; fall back to a scan
        for v in range(self.n):
            if val[2 * v] == 0:
                return 2 * v + self.phase[v]
        return -1

    def _locked(self, c: list) -> bool:
        return self.reason[c[0] >> 1] is c and self.val[c[0]] == 1

    def _reduce_db(self):
        lbd = self.lbd
        self.learnts.sort(key=lambda c: (lbd.get(id(c), 99), len(c)))
        keep_n = len(self.learnts) // 2
        kept, dropped = [], set()
        for k, c in enumerate(self.learnts):
            if k < keep_n or lbd.get(id(c), 99) <= 2 or self._locked(c):
                kept.append(c)
            else:
                dropped.add(id(c))
        if not dropped:
            return
        for w in range(len(self.watches)):
            ws = self.watches[w]
            if ws:
                self.watches[w] = [c for c in ws if id(c) not in dropped]
        for i in dropped:
            lbd.pop(i, None)
        self.learnts = kept

    def solve(self, conflict_limit: Optional[int] = None, deadline: Optional[float] = None) -> Optional[bool]:
        """True (model available), False (unsatisfiable) or None (budget)."""
        self._model = None
        if not self.ok:
            return False
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        start_conflicts = self.conflicts
        curr_restart = 0
        while True:
            limit = _luby(2, curr_restart) * self.restart_base
            curr_restart += 1
            status = self._search(int(limit), start_conflicts, conflict_limit, deadline)
            if status is not None:
                if status is True:
                    self._model = [self.val[2 * v] == 1 for v in range(self.n)]
                    self._cancel_until(0)
                elif status is False:
                    self.ok = False
                return status
            if status is None and self._budget_hit(start_conflicts, conflict_limit, deadline):
                self._cancel_until(0)
                return None
            self.restarts += 1

    def _budget_hit(self, start, conflict_limit, deadline) -> bool:
        if conflict_limit is not None and self.conflicts - start >= conflict_limit:
            return True
        return deadline is not None and time.monotonic() >= deadline

    def _search(self, nof_conflicts: int, start, conflict_limit, deadline) -> Optional[bool]:
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    return False
                learnt, bt, lbd = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = lbd
                    self._assign(learnt[0], learnt)
                self.var_inc /= self.var_decay
                if (self.conflicts & 255) == 0 and self._budget_hit(start, conflict_limit, deadline):
                    self._cancel_until(0)
                    return None
            else:
                if conflicts_here >= nof_conflicts:
                    self._cancel_until(0)
                    return None
                if len(self.learnts) - len(self.trail) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.1
                lit = self._pick()
                if lit == -1:
                    return True
                self.decisions += 1
                if (self.decisions & 4095) == 0 and deadline is not None and time.monotonic() >= deadline:
                    self._cancel_until(0)
                    return None
                self.trail_lim.append(len(self.trail))
                self._assign(lit, None)

    def model(self) -> Dict[int, bool]:
        if self._model is None:
            raise RuntimeError("no model available")
        return {v + 1: b for v, b in enumerate(self._model)}

    def value(self, lit: int) -> bool:
        if self._model is None:
            raise RuntimeError("no model available")
        b = self._model[abs(lit) - 1]
        return b if lit > 0 else not b
