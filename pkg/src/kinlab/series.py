"""Time-stamped scalar diagnostics."""
from __future__ import annotations

import numpy as np


class DiagnosticSeries:
    """Columns of scalar diagnostics sharing a time axis.

    Column order is the order in which names first appear, which keeps CSV
    output stable.
    """

    def __init__(self, names=()):
        self.t: list[float] = []
        self._cols: dict[str, list[float]] = {name: [] for name in names}

    def append(self, t: float, **values: float) -> None:
        if self.t and t < self.t[-1]:
            raise ValueError(f"time {t} precedes last recorded time {self.t[-1]}")
        k = len(self.t)
        for name in values:
            if name not in self._cols:
                if k:
                    raise KeyError(f"column {name!r} introduced after {k} rows")
                self._cols[name] = []
        if set(values) != set(self._cols):
            missing = sorted(set(self._cols) - set(values))
            raise KeyError(f"missing values for columns {missing}")
        self.t.append(float(t))
        for name, value in values.items():
            self._cols[name].append(float(value))

    @property
    def names(self) -> list[str]:
        return list(self._cols)

    def __len__(self) -> int:
        return len(self.t)

    def __contains__(self, name: str) -> bool:
        return name in self._cols

    def __getitem__(self, name: str) -> np.ndarray:
        if name == "t":
            return np.asarray(self.t)
        return np.asarray(self._cols[name])

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t)

    def last(self, name: str) -> float:
        return self._cols[name][-1]

    @classmethod
    def from_columns(cls, t, **columns) -> "DiagnosticSeries":
        s = cls(columns)
        for k, tk in enumerate(t):
            s.append(tk, **{name: col[k] for name, col in columns.items()})
        return s
