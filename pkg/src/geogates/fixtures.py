"""Published optimized coefficient sets, shipped as ``data/table1.json``."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .trajectory import CONFIGS, GATES, AnsatzParams, GateTarget, normalize_tau

CASE_NAMES = {
    1: "AreaMin",
    2: "DecoherenceFidelity",
    3: "EpsRobust",
    4: "EtaRobust",
    5: "BothRobust",
}


@dataclass(frozen=True)
class Fixture:
    case: int
    gate: str
    config: str
    a_theta: tuple[float, ...]
    a_phi: tuple[float, ...]
    s_over_pi: Optional[float]

    @property
    def target(self) -> GateTarget:
        return GATES[self.gate]

    def params(self, tau: Optional[float] = None, omega_m: float = 1.0) -> AnsatzParams:
        """Ansatz for this row; ``tau`` defaults to the peak-amplitude normalization."""
        p = CONFIGS[self.config](self.a_theta, self.a_phi, tau=1.0 if tau is None else tau)
        return normalize_tau(p, omega_m) if tau is None else p


@lru_cache(maxsize=None)
def load_table1() -> tuple[Fixture, ...]:
    raw = json.loads(resources.files("geogates").joinpath("data/table1.json").read_text())
    return tuple(
        Fixture(
            case=r["case"],
            gate=r["gate"],
            config=r["config"],
            a_theta=tuple(float(x) for x in r["a_theta"]),
            a_phi=tuple(float(x) for x in r["a_phi"]),
            s_over_pi=r["S_over_pi"],
        )
        for r in raw
    )


def fixture(case: int, gate: str) -> Fixture:
    for row in load_table1():
        if row.case == case and row.gate == gate:
            return row
    raise KeyError(f"no published row for case {case}, gate {gate!r}")
