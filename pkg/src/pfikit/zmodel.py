"""Effective nuclear potential Z(n, z0) = n + c0 + c1/z0 and its asset loader."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class ZModel:
    """Coefficients of the effective nuclear potential seen by the tunneling electron."""

    c0: float
    c1: float
    note: str = ""

    def __post_init__(self) -> None:
        if self.c1 < 0.0:
            raise ConfigError(f"ZModel c1 must be >= 0, got {self.c1}")

    def z(self, n: int, z0_au: float) -> float:
        """Z for source charge state n at distance z0 (a.u.)."""
        if z0_au <= 0.0:
            raise DomainError(f"z0 must be > 0 a.u., got {z0_au}")
        return n + self.c0 + self.c1 / z0_au


KINGHAM_Z = ZModel(c0=1.0, c1=4.5, note="default")


def load_zmodel(path: str | Path) -> ZModel:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse Z-model file {path}: {exc}") from exc
    try:
        return ZModel(c0=float(raw["c0"]), c1=float(raw["c1"]), note=str(raw.get("note", "")))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed Z-model file {path}: {exc}") from exc
