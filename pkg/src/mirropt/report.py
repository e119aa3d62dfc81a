"""Per-iteration traces and final solver reports."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = ("k", "f_value", "g_value", "step", "M_k", "oracle_calls",
                 "elapsed_ns", "bound_value")


@dataclass
class TraceRow:
    k: int
    f_value: float
    g_value: float = float("nan")
    step: float = float("nan")
    M_k: float = float("nan")
    oracle_calls: int = 0
    elapsed_ns: int = 0
    bound_value: float = float("nan")


class RunTrace:
    """Append-only list of TraceRow with a non-decreasing oracle counter."""

    def __init__(self):
        self.rows = []

    def append(self, row):
        if self.rows and row.oracle_calls < self.rows[-1].oracle_calls:
            raise ValueError("oracle call counter must be non-decreasing")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


@dataclass
class SolverReport:
    method: str
    x_out: np.ndarray
    f_out: float
    iterations: int
    oracle_calls: int
    trace: RunTrace
    bound: float | None = None          # headline theorem bound, if computable
    gap: float | None = None            # f_out - f_star when f_star known
    min_dist: float | None = None       # min over iterates of ||x^k - x_star||
    stopped_exact: bool = False
    violations: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
