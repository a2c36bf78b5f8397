"""Game transcripts: the round-by-round record of an online prediction game."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


class ProtocolError(ValueError):
    """Violation of the online protocol (e.g. |y| > Y)."""


@dataclass
class GameTranscript:
    """Ordered record of rounds (x_n, mu_n, y_n) with running square losses.

    The config fingerprint (algorithm/kernel strings, Y, seed) travels with
    the data so audits can pick the right bound.
    """

    algorithm: str
    kernel: str
    Y: float
    seed: Optional[int] = None
    xs: List[np.ndarray] = field(default_factory=list)
    mus: List[float] = field(default_factory=list)
    ys: List[float] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)
    cumlosses: List[float] = field(default_factory=list)

    def append(self, x, mu: float, y: float) -> None:
        if abs(y) > self.Y:
            raise ProtocolError(f"label {y} outside [-Y, Y] with Y={self.Y} "
                                f"at round {len(self.ys) + 1}")
        loss = (y - mu) ** 2
        self.xs.append(np.atleast_1d(np.asarray(x, dtype=np.float64)))
        self.mus.append(float(mu))
        self.ys.append(float(y))
        self.losses.append(loss)
        self.cumlosses.append((self.cumlosses[-1] if self.cumlosses else 0.0) + loss)

    def __len__(self) -> int:
        return len(self.ys)

    @property
    def cumloss(self) -> float:
        return self.cumlosses[-1] if self.cumlosses else 0.0

    @property
    def points(self) -> np.ndarray:
        if not self.xs:
            return np.empty((0, 1))
        return np.ascontiguousarray(np.stack(self.xs))

    @property
    def residuals(self) -> np.ndarray:
        return np.asarray(self.ys) - np.asarray(self.mus)

    # CSV round-trip.  Columns: n, x1..xm, mu, y, loss, cumloss (the object
    # coordinates are needed to audit a transcript read back from disk).

    def to_csv(self) -> str:
        m = self.xs[0].shape[0] if self.xs else 1
        buf = io.StringIO()
        cols = ",".join(f"x{d + 1}" for d in range(m))
        buf.write(f"n,{cols},mu,y,loss,cumloss\n")
        for i in range(len(self)):
            xcols = ",".join(repr(float(v)) for v in self.xs[i])
            buf.write(f"{i + 1},{xcols},{self.mus[i]!r},{self.ys[i]!r},"
                      f"{self.losses[i]!r},{self.cumlosses[i]!r}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str, algorithm: str = "", kernel: str = "",
                 Y: float = 1.0, seed: Optional[int] = None) -> "GameTranscript":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty transcript file")
        header = lines[0].split(",")
        try:
            xcols = [i for i, h in enumerate(header) if h.startswith("x")]
            mu_i = header.index("mu")
            y_i = header.index("y")
        except ValueError as exc:
            raise ValueError(f"bad transcript header {lines[0]!r}") from exc
        t = cls(algorithm, kernel, Y, seed)
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = ln.split(",")
            if len(parts) != len(header):
                raise ValueError(f"malformed transcript line {lineno}: {ln!r}")
            x = np.array([float(parts[i]) for i in xcols])
            t.append(x, float(parts[mu_i]), float(parts[y_i]))
        return t

    @classmethod
    def load(cls, path, **kw) -> "GameTranscript":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read(), **kw)
