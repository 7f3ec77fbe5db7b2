"""Parameterized Bloch-sphere trajectories and the quantities read off them.

A trajectory is a pair of angle functions ``theta(t)``, ``phi(t)`` of the form

    nu(t) = D(t) + sum_n a_n * sin(b_n * pi * t / tau) ** c_n

with ``D`` either a constant or a ``c * sin^2(pi t / (2 tau))`` ramp. All
evaluation is vectorized over ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

DEFAULT_GRID = 4000


@dataclass(frozen=True)
class Constant:
    """Time-independent baseline ``D(t) = c``."""

    c: float = 0.0

    def values(self, t, tau):
        t = np.asarray(t, dtype=float)
        zero = np.zeros_like(t)
        return self.c + zero, zero, zero


@dataclass(frozen=True)
class HalfSineSqRamp:
    """Baseline ``D(t) = c * sin^2(pi t / (2 tau))``, rising from 0 to ``c``."""

    c: float

    def values(self, t, tau):
        t = np.asarray(t, dtype=float)
        k = np.pi / tau
        # c sin^2(k t / 2) = c (1 - cos k t) / 2
        val = 0.5 * self.c * (1.0 - np.cos(k * t))
        d1 = 0.5 * self.c * k * np.sin(k * t)
        d2 = 0.5 * self.c * k * k * np.cos(k * t)
        return val, d1, d2


Baseline = Union[Constant, HalfSineSqRamp]


@dataclass(frozen=True)
class Term:
    """One ``a * sin(b pi t / tau) ** c`` contribution."""

    a: float
    b: float
    c: int

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"exponent c must be a positive integer, got {self.c}")
        object.__setattr__(self, "c", int(self.c))

    def values(self, t, tau):
        k = self.b * np.pi / tau
        s = np.sin(k * t)
        co = np.cos(k * t)
        c = self.c
        val = self.a * s**c
        d1 = self.a * c * s ** (c - 1) * co * k
        if c == 1:
            d2 = -self.a * k * k * s
        else:
            d2 = self.a * k * k * (c * (c - 1) * s ** (c - 2) * co**2 - c * s**c)
        return val, d1, d2


def _component(baseline: Baseline, terms: Sequence[Term], t, tau):
    val, d1, d2 = baseline.values(t, tau)
    val, d1, d2 = np.array(val, float), np.array(d1, float), np.array(d2, float)
    for term in terms:
        v, g, h = term.values(t, tau)
        val = val + v
        d1 = d1 + g
        d2 = d2 + h
    return val, d1, d2


@dataclass(frozen=True)
class AnsatzParams:
    """Free-coefficient description of a ``(theta(t), phi(t))`` trajectory."""

    tau: float
    theta_baseline: Baseline = Constant(0.0)
    phi_baseline: Baseline = Constant(0.0)
    theta_terms: tuple[Term, ...] = ()
    phi_terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "theta_terms", tuple(self.theta_terms))
        object.__setattr__(self, "phi_terms", tuple(self.phi_terms))

    @property
    def a_theta(self) -> np.ndarray:
        return np.array([term.a for term in self.theta_terms])

    @property
    def a_phi(self) -> np.ndarray:
        return np.array([term.a for term in self.phi_terms])

    def with_coefficients(self, a_theta, a_phi) -> "AnsatzParams":
        """Same configuration with new ``a`` coefficients."""
        if len(a_theta) != len(self.theta_terms) or len(a_phi) != len(self.phi_terms):
            raise ValueError("coefficient count does not match the ansatz configuration")
        th = tuple(replace(term, a=float(a)) for term, a in zip(self.theta_terms, a_theta))
        ph = tuple(replace(term, a=float(a)) for term, a in zip(self.phi_terms, a_phi))
        return replace(self, theta_terms=th, phi_terms=ph)

    def with_tau(self, tau: float) -> "AnsatzParams":
        return replace(self, tau=float(tau))

    def time_grid(self, grid: int = DEFAULT_GRID) -> np.ndarray:
        return np.linspace(0.0, self.tau, int(grid) + 1)


def t_config(a_theta=(0.0,) * 4, a_phi=(0.0,) * 4, tau: float = 1.0) -> AnsatzParams:
    """Ansatz configuration used for Z-axis gates (T, CP).

    Zero baselines; ``theta`` terms ``sin^2(n pi t/tau)``, ``phi`` terms
    ``sin(pi t / (2 tau)) ** (n + 1)``.
    """
    th = tuple(Term(a, n, 2) for n, a in enumerate(a_theta, start=1))
    ph = tuple(Term(a, 0.5, n + 1) for n, a in enumerate(a_phi, start=1))
    return AnsatzParams(tau, Constant(0.0), Constant(0.0), th, ph)


def h_config(a_theta=(0.0,) * 4, a_phi=(0.0,) * 4, tau: float = 1.0) -> AnsatzParams:
    """Ansatz configuration used for the Hadamard gate.

    ``theta`` starts at pi/4, ``phi`` ramps 0 -> 2 pi; all terms ``sin^2(n pi t/tau)``.
    """
    th = tuple(Term(a, n, 2) for n, a in enumerate(a_theta, start=1))
    ph = tuple(Term(a, n, 2) for n, a in enumerate(a_phi, start=1))
    return AnsatzParams(tau, Constant(np.pi / 4), HalfSineSqRamp(2 * np.pi), th, ph)


CONFIGS = {"T": t_config, "H": h_config}


@dataclass(frozen=True)
class TrajectoryPoint:
    t: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    theta_dot: np.ndarray
    phi_dot: np.ndarray
    theta_ddot: np.ndarray = field(default=None, repr=False)
    phi_ddot: np.ndarray = field(default=None, repr=False)


def evaluate(params: AnsatzParams, t, *, check_range: bool = True) -> TrajectoryPoint:
    """Angles and their first two analytic time derivatives at ``t``.

    ``t`` may be a scalar or an array; out-of-range times raise ``ValueError``
    unless ``check_range`` is false.
    """
    t_arr = np.asarray(t, dtype=float)
    if check_range:
        slack = 1e-12 * params.tau
        if np.any(t_arr < -slack) or np.any(t_arr > params.tau + slack):
            raise ValueError(f"t outside [0, tau={params.tau}]")
    th, dth, ddth = _component(params.theta_baseline, params.theta_terms, t_arr, params.tau)
    ph, dph, ddph = _component(params.phi_baseline, params.phi_terms, t_arr, params.tau)
    if t_arr.ndim == 0:
        th, dth, ddth, ph, dph, ddph = (float(x) for x in (th, dth, ddth, ph, dph, ddph))
        t_arr = float(t_arr)
    return TrajectoryPoint(t_arr, th, ph, dth, dph, ddth, ddph)


# short alias matching the operation name
eval = evaluate  # noqa: A001


def check_cyclicity(params: AnsatzParams, tol: float = 1e-9) -> tuple[bool, str]:
    """Whether the auxiliary states return to themselves after ``tau``.

    At the poles (``sin theta(0) == 0``) the auxiliary states do not depend on
    ``phi``, so only ``theta`` has to close.
    """
    p0 = evaluate(params, 0.0)
    p1 = evaluate(params, params.tau)
    dtheta = p1.theta - p0.theta
    if abs(dtheta) > tol:
        return False, f"theta does not close: theta(tau) - theta(0) = {dtheta:.3e}"
    dphi = _wrap(p1.phi - p0.phi)
    if abs(dphi) <= tol:
        return True, "theta and phi close"
    if abs(np.sin(p0.theta)) <= tol:
        return True, "theta closes at a pole; phi is irrelevant there"
    return False, f"phi does not close modulo 2 pi: residual {dphi:.3e}"


def _wrap(x):
    """Wrap an angle into (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, 2 * np.pi)


wrap_angle = _wrap


def phase_integrand(pt: TrajectoryPoint):
    return (1.0 - np.cos(pt.theta)) * pt.phi_dot


def running_phase(params: AnsatzParams, grid: int = DEFAULT_GRID) -> tuple[np.ndarray, np.ndarray]:
    """Running integral ``Phi(t) = int_0^t (1 - cos theta) phi_dot`` on a uniform grid.

    The two evolution branches carry phases ``-Phi(t)/2`` and ``+Phi(t)/2``.
    """
    t = params.time_grid(grid)
    pt = evaluate(params, t)
    return t, cumulative_simpson(phase_integrand(pt), x=t, initial=0.0)


def geometric_phase(params: AnsatzParams, grid: int = DEFAULT_GRID, *, tol: float = 1e-9) -> float:
    """Total geometric phase of a cyclic trajectory (composite Simpson)."""
    cyclic, reason = check_cyclicity(params, tol)
    if not cyclic:
        raise ValueError(f"geometric phase requires a cyclic trajectory: {reason}")
    return raw_phase(params, grid)


def raw_phase(params: AnsatzParams, grid: int = DEFAULT_GRID) -> float:
    """The phase integral without the cyclicity precondition."""
    t = params.time_grid(grid)
    return float(simpson(phase_integrand(evaluate(params, t)), x=t))


def amplitude(pt: TrajectoryPoint):
    """Drive amplitude ``|Omega|`` along the trajectory."""
    return 0.5 * np.hypot(pt.phi_dot * np.sin(pt.theta) * np.cos(pt.theta), pt.theta_dot)


def pulse_area(params: AnsatzParams, grid: int = DEFAULT_GRID) -> float:
    """Pulse area ``int_0^tau |Omega(t)| dt``; independent of ``tau``."""
    t = params.time_grid(grid)
    return float(simpson(amplitude(evaluate(params, t)), x=t))


def peak_amplitude(params: AnsatzParams, grid: int = DEFAULT_GRID) -> float:
    t = params.time_grid(grid)
    return float(np.max(amplitude(evaluate(params, t))))


def normalize_tau(params: AnsatzParams, omega_m: float = 1.0, grid: int = DEFAULT_GRID) -> AnsatzParams:
    """Rescale ``tau`` so the peak drive amplitude equals ``omega_m``.

    The drive scales as ``1/tau``, so one evaluation fixes the duration. An
    all-zero trajectory has no drive and keeps its ``tau``.
    """
    peak = peak_amplitude(params, grid) * params.tau
    if peak == 0.0:
        return params
    return params.with_tau(peak / omega_m)


@dataclass(frozen=True)
class GateTarget:
    """Rotation ``exp(-i angle/2 n.sigma)`` about the axis at polar angles ``(theta0, phi0)``."""

    theta0: float
    phi0: float
    rotation_angle: float

    @classmethod
    def from_half_angle(cls, theta0: float, phi0: float, gamma: float) -> "GateTarget":
        """Build from the ``(theta0, phi0, gamma)`` triples used to name gates (angle = 2 gamma)."""
        return cls(theta0, phi0, 2.0 * gamma)

    @property
    def axis(self) -> np.ndarray:
        st = np.sin(self.theta0)
        return np.array([st * np.cos(self.phi0), st * np.sin(self.phi0), np.cos(self.theta0)])

    def unitary(self) -> np.ndarray:
        n = self.axis
        n_sigma = np.array(
            [[n[2], n[0] - 1j * n[1]], [n[0] + 1j * n[1], -n[2]]], dtype=complex
        )
        half = 0.5 * self.rotation_angle
        return np.cos(half) * np.eye(2) - 1j * np.sin(half) * n_sigma


T_GATE = GateTarget.from_half_angle(0.0, 0.0, np.pi / 8)
H_GATE = GateTarget.from_half_angle(np.pi / 4, 0.0, np.pi / 2)
# CP(pi/2) is a Z rotation by pi in the {|02>, |11>} subspace
CP_GATE = GateTarget.from_half_angle(0.0, 0.0, np.pi / 2)

GATES = {"T": T_GATE, "H": H_GATE, "CP": CP_GATE}
