"""Run an external MaxSAT solver on a WCNF file and check what it returns."""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
import tempfile
import time
from typing import List, Optional, Sequence, Union

from ..cnf import MalformedOutput, SolverVerdict, Status, WcnfInstance, parse_solver_output, write_wcnf
from .builtin import Budget


class SolverSpawnError(RuntimeError):
    pass


class SolverProtocolError(RuntimeError):
    pass


class ModelValidationError(RuntimeError):
    pass


def default_solver_cmd(backend: str = "cpsat") -> List[str]:
    """The bundled adapter, which answers in the usual solver output format."""
    return [sys.executable, "-m", "maxreal.maxsat.adapter", "--backend", backend, "{wcnf}"]


def _argv(template: Union[str, Sequence[str]], path: str) -> List[str]:
    parts = shlex.split(template) if isinstance(template, str) else list(template)
    if not any("{wcnf}" in p for p in parts):
        parts.append("{wcnf}")
    return [p.replace("{wcnf}", path) for p in parts]


def solve_external(inst: WcnfInstance, solver_cmd: Union[str, Sequence[str], None] = None,
                   budget: Optional[Budget] = None, env: Optional[dict] = None) -> SolverVerdict:
    budget = budget or Budget()
    template = solver_cmd if solver_cmd is not None else default_solver_cmd()
    fd, path = tempfile.mkstemp(suffix=".wcnf", prefix="maxreal-")
    t0 = time.monotonic()
    timed_out = False
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            write_wcnf(inst, fh)
        argv = _argv(template, path)
        run_env = dict(os.environ)
        if env:
            run_env.update(env)
        if budget.time_limit is not None:
            run_env.setdefault("MAXREAL_TIME_LIMIT", str(budget.time_limit))
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, env=run_env,
                                  timeout=None if budget.time_limit is None else budget.time_limit + 30)
            stdout = proc.stdout
        except FileNotFoundError as exc:
            raise SolverSpawnError(f"cannot start solver: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            timed_out = True
            stdout = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    elapsed = time.monotonic() - t0
    try:
        verdict = parse_solver_output(stdout, inst.total_soft_weight, inst.num_vars)
    except MalformedOutput as exc:
        if timed_out:
            return SolverVerdict(Status.UNKNOWN, stats={"time": elapsed})
        raise SolverProtocolError(f"{exc}; solver output was:\n{stdout[-2000:]}") from exc
    if timed_out and verdict.status is Status.OPTIMUM:
        verdict.status = Status.SATISFIABLE
    verdict.stats["time"] = elapsed
    if verdict.model is not None:
        bad = inst.violated_hard(verdict.model)
        if bad is not None:
            raise ModelValidationError(f"solver model violates hard clause {bad}")
        achieved = inst.soft_weight(verdict.model)
        if verdict.cost is not None and verdict.cost != inst.total_soft_weight - achieved:
            if verdict.status is Status.OPTIMUM:
                raise SolverProtocolError(
                    f"reported cost {verdict.cost} but the model falsifies weight "
                    f"{inst.total_soft_weight - achieved}")
        verdict.achieved_weight = achieved
        verdict.cost = inst.total_soft_weight - achieved
    return verdict
