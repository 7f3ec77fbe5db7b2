"""Coefficient search for the five optimization scenarios.

The target-phase constraint ``Phi = Theta (mod 2 pi)`` is enforced by a
quadratic penalty during a bounded Nelder-Mead search, then made exact by a
minimum-norm Newton projection onto the constraint surface.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .controls import reverse_engineer
from .dynamics import DEFAULT_STEPS, fidelity_six_state, qubit_noise
from .fixtures import CASE_NAMES
from .robustness import cost
from .trajectory import CONFIGS, AnsatzParams, GateTarget, _wrap, check_cyclicity, normalize_tau, pulse_area, raw_phase

BOUND = 10.0
DEFAULT_PENALTY = 1e3
RESIDUAL_TOL = 1e-6
NONCYCLIC_PENALTY = 1e6
OPT_GRID = 1000

_COST_KIND = {3: "eps", 4: "eta", 5: "both"}


@dataclass(frozen=True)
class Scenario:
    """One optimization problem.

    ``gamma`` is the decay and dephasing rate for case 2 in units of the peak
    drive. ``tau=None`` fixes the duration by peak normalization (peak drive 1).
    """

    case: int
    target: GateTarget
    gate_name: str = "T"
    config: str = "T"
    n_terms: int = 4
    gamma: float = 1e-4
    tau: Optional[float] = None
    grid: int = OPT_GRID
    steps: int = DEFAULT_STEPS
    penalty: float = DEFAULT_PENALTY

    def __post_init__(self):
        if self.case not in CASE_NAMES:
            raise ValueError(f"unknown case {self.case}; expected one of {sorted(CASE_NAMES)}")
        if self.config not in CONFIGS:
            raise ValueError(f"unknown ansatz config {self.config!r}")
        if self.gamma < 0:
            raise ValueError("decoherence rate must be non-negative")
        if self.grid < 100:
            raise ValueError("grid must have at least 100 points")

    @property
    def dim(self) -> int:
        return 2 * self.n_terms

    def split(self, coefficients) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(coefficients, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coefficients, got shape {x.shape}")
        return x[: self.n_terms], x[self.n_terms:]

    def params(self, coefficients) -> AnsatzParams:
        a_theta, a_phi = self.split(coefficients)
        p = CONFIGS[self.config](a_theta, a_phi, tau=1.0 if self.tau is None else self.tau)
        if self.tau is None and self.case != 1:
            p = normalize_tau(p, 1.0, self.grid)
        return p

    def residual(self, coefficients) -> float:
        return float(_wrap(raw_phase(self.params(coefficients), self.grid) - self.target.rotation_angle))


@dataclass
class OptimResult:
    case: int
    gate: str
    config: str
    a_theta: list
    a_phi: list
    objective: float
    residual: float
    seed: int
    budget: int
    success: bool = True
    message: str = ""
    iterations: int = 0
    evaluations: int = 0
    restarts: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.a_theta, self.a_phi])

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimResult":
        return cls(**d)


def raw_objective(scenario: Scenario, coefficients) -> float:
    """Scenario figure of merit without the phase penalty."""
    p = scenario.params(coefficients)
    if scenario.case == 1:
        return pulse_area(p, scenario.grid)
    if scenario.case == 2:
        noise = qubit_noise(scenario.gamma, scenario.gamma)
        f = reverse_engineer(p, scenario.grid)
        return 1.0 - fidelity_six_state(f, noise, scenario.target.unitary(), scenario.steps)
    return cost(p, _COST_KIND[scenario.case], scenario.grid)


def objective(scenario: Scenario, coefficients) -> float:
    """Penalized objective: figure of merit plus ``penalty * wrap(Phi - Theta)^2``."""
    p = scenario.params(coefficients)
    ok, _ = check_cyclicity(p)
    if not ok:
        # finite so the simplex can walk back into the feasible region
        return NONCYCLIC_PENALTY * (1.0 + float(np.sum(np.square(coefficients))))
    r = scenario.residual(coefficients)
    return raw_objective(scenario, coefficients) + scenario.penalty * r * r


def project(scenario: Scenario, x, tol: float = 1e-10, max_iter: int = 30, h: float = 1e-6):
    """Minimum-norm Newton steps onto ``Phi = Theta``; returns ``(x, residual)``."""
    x = np.array(x, dtype=float)
    r = scenario.residual(x)
    for _ in range(max_iter):
        if abs(r) < tol:
            break
        grad = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            grad[i] = (scenario.residual(x + e) - scenario.residual(x - e)) / (2 * h)
        norm2 = float(grad @ grad)
        if norm2 == 0.0:
            break
        x = np.clip(x - r * grad / norm2, -BOUND, BOUND)
        r = scenario.residual(x)
    return x, r


def _failure(scenario, seed, budget, message, **diag) -> OptimResult:
    n = scenario.n_terms
    return OptimResult(scenario.case, scenario.gate_name, scenario.config, [0.0] * n, [0.0] * n,
                       float("inf"), float("inf"), seed, budget, success=False, message=message, **diag)


def _nelder_mead(scenario: Scenario, start, maxfev: int):
    return _scipy_minimize(lambda x: objective(scenario, x), np.clip(start, -BOUND, BOUND),
                           method="Nelder-Mead", bounds=[(-BOUND, BOUND)] * scenario.dim,
                           options={"maxfev": maxfev, "xatol": 1e-9, "fatol": 1e-13, "adaptive": True})


def minimize(scenario: Scenario, seed_count: int = 16, budget: int = 16000, seed: int = 0,
             x0: Optional[Sequence[Sequence[float]]] = None, start_scale: float = 1.5,
             polish: int = 2) -> OptimResult:
    """Best-of-restarts bounded Nelder-Mead search.

    ``budget`` is the total number of objective evaluations (projection steps
    excluded). Half of it is spread over short screening runs from the warm
    starts in ``x0`` and ``seed_count`` random starts, uniform in
    ``[-start_scale, start_scale]`` within the ``|a| <= 10`` box; the rest
    refines the ``polish`` best screened points. The penalty weight doubles
    for later runs each time a run ends too far from the target phase.
    """
    if budget < 1:
        raise ValueError("budget must be at least one evaluation")
    rng = np.random.default_rng(seed)
    starts = [np.asarray(s, dtype=float) for s in (x0 or [])]
    scale = min(start_scale, BOUND)
    starts += [rng.uniform(-scale, scale, scenario.dim) for _ in range(seed_count)]
    if not starts:
        raise ValueError("need at least one start")
    polish = max(0, min(polish, len(starts)))
    screen_fev = max(1, (budget if polish == 0 else budget // 2) // len(starts))
    polish_fev = max(1, (budget - screen_fev * len(starts)) // polish) if polish else 0

    penalty = scenario.penalty
    iterations = evaluations = 0
    screened = []
    for start in starts:
        res = _nelder_mead(replace(scenario, penalty=penalty), start, screen_fev)
        iterations += int(res.nit)
        evaluations += int(res.nfev)
        screened.append((float(res.fun), res.x))
        if abs(scenario.residual(res.x)) > 1e-2:
            penalty *= 2.0
    screened.sort(key=lambda item: item[0])

    candidates = [x for _, x in screened]
    for k in range(polish):
        res = _nelder_mead(replace(scenario, penalty=penalty), screened[k][1], polish_fev)
        iterations += int(res.nit)
        evaluations += int(res.nfev)
        candidates.append(res.x)

    best = None
    for x in candidates:
        x, r = project(scenario, x)
        if not check_cyclicity(scenario.params(x))[0] or abs(r) >= RESIDUAL_TOL:
            continue
        value = objective(scenario, x)
        if best is None or value < best[0]:
            best = (value, x, r)

    diag = dict(iterations=iterations, evaluations=evaluations, restarts=len(starts))
    if best is None:
        return _failure(scenario, seed, budget, "no start reached the target phase within tolerance", **diag)
    value, x, r = best
    a_theta, a_phi = scenario.split(x)
    return OptimResult(scenario.case, scenario.gate_name, scenario.config,
                       [float(v) for v in a_theta], [float(v) for v in a_phi],
                       float(value), float(r), seed, budget, **diag)


def z_rotation(angle: float) -> GateTarget:
    return GateTarget(0.0, 0.0, float(angle))


def area_sweep(angles: Sequence[float], seed: int = 0, seed_count: int = 8, budget: int = 8000,
               grid: int = OPT_GRID) -> list[OptimResult]:
    """Minimum pulse area for Z rotations by each angle.

    Angles are solved in increasing order, each warm-started from the previous
    solution, and then revisited in decreasing order warm-started from the
    larger neighbour; the better of the two passes is kept.
    """
    order = sorted(range(len(angles)), key=lambda i: angles[i])
    results: list[Optional[OptimResult]] = [None] * len(angles)

    def scen(angle):
        return Scenario(1, z_rotation(angle), gate_name=f"Z({angle:.6g})", config="T", grid=grid)

    prev = None
    for k, i in enumerate(order):
        warm = [prev.coefficients] if prev is not None and prev.success else None
        results[i] = minimize(scen(angles[i]), seed_count, budget, seed + k, x0=warm)
        prev = results[i]
    for k, i in enumerate(reversed(order[:-1])):
        upper = results[order[len(order) - 1 - k]]
        if not upper.success:
            continue
        alt = minimize(scen(angles[i]), 0, budget // 2, seed, x0=[upper.coefficients])
        if alt.success and (not results[i].success or alt.objective < results[i].objective):
            results[i] = alt
    return results
