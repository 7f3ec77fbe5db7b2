"""Second-order error analysis of geometric gates.

For a static error ``V(t) = eps*(Omega|0><1| + h.c.) + eta*Omega_m*sigma_z/2`` the
gate fidelity to second order is ``1 - |int e|^2/2 - |int g|^2/2`` with
``e = <psi_1|V|psi_1>`` and ``g = <psi_1|V|psi_2>`` along the ideal evolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.integrate import simpson

from .controls import ControlField, auxiliary_states, reverse_engineer, two_level_schedule
from .dynamics import DEFAULT_STEPS, SIGMA_Z, _split_steps, gate_unitary, propagate_unitary, trace_fidelity
from .trajectory import DEFAULT_GRID, AnsatzParams, GateTarget, evaluate, running_phase

Which = Literal["eps", "eta", "both"]


@dataclass(frozen=True)
class ErrorModel:
    """Fractional amplitude error ``epsilon`` and detuning error ``eta`` (in units of Omega_m)."""

    epsilon: float = 0.0
    eta: float = 0.0


@dataclass(frozen=True)
class ErrorIntegrands:
    """Sampled error integrands; ``segments`` are index ranges integrated separately."""

    t: np.ndarray
    g_eps: np.ndarray
    g_eta: np.ndarray
    e_eps: np.ndarray
    e_eta: np.ndarray
    segments: tuple[tuple[int, int], ...] = ()

    def integral(self, values) -> complex:
        segs = self.segments or ((0, len(self.t)),)
        return sum(simpson(values[a:b], x=self.t[a:b]) for a, b in segs)

    @property
    def g(self) -> np.ndarray:
        return self.g_eps + self.g_eta

    @property
    def e(self) -> np.ndarray:
        return self.e_eps + self.e_eta


def integrands(params: AnsatzParams, err: ErrorModel, grid: int = DEFAULT_GRID,
               omega_m: Optional[float] = None) -> ErrorIntegrands:
    """Closed-form integrands along an ansatz trajectory.

    The phase factor of ``g`` is ``exp(-i (phi - Phi(t)))`` where ``Phi(t)``
    is the running geometric phase: ``psi_1`` and ``psi_2`` pick up
    ``-Phi/2`` and ``+Phi/2``.
    """
    t, big_phi = running_phase(params, grid)
    pt = evaluate(params, t)
    if omega_m is None:
        omega_m = reverse_engineer(params, grid).omega_max
    s, c = np.sin(pt.theta), np.cos(pt.theta)
    rot = np.exp(-1j * (pt.phi - big_phi))
    eps, eta = err.epsilon, err.eta
    g_eps = 0.5 * eps * (pt.phi_dot * s * c * c + 1j * pt.theta_dot) * rot
    g_eta = 0.5 * eta * omega_m * s * rot
    e_eps = -0.5 * eps * pt.phi_dot * s * s * c
    e_eta = 0.5 * eta * omega_m * c + np.zeros_like(t)
    return ErrorIntegrands(t, g_eps, g_eta, e_eps, e_eta)


def numeric_integrands(field: ControlField, target: GateTarget, err: ErrorModel,
                       steps: int = DEFAULT_STEPS, omega_m: Optional[float] = None) -> ErrorIntegrands:
    """Integrands from numerically propagated states ``U(t)|mu_k(0)>``.

    Works for any two-level drive (including the piecewise reference) whose
    ideal gate is a rotation about ``target``'s axis.
    """
    if omega_m is None:
        omega_m = field.omega_max
    mu1, mu2 = auxiliary_states(target.theta0, target.phi0)
    block = np.stack([mu1, mu2], axis=1)
    schedule = two_level_schedule(field)
    ts, psis, omegas, segs = [], [], [], []
    start_idx = 0
    for (h, a, b), n, piece in zip(schedule, _split_steps(schedule, steps), field.pieces):
        block, path = propagate_unitary(h, a, b, n, u0=block, return_path=True)
        t = np.linspace(a, b, n + 1)
        ts.append(t)
        psis.append(path)
        omegas.append(piece.fn(t)[1])
        segs.append((start_idx, start_idx + n + 1))
        start_idx += n + 1
    t = np.concatenate(ts)
    psi = np.concatenate(psis)
    omega = np.concatenate(omegas)
    p1, p2 = psi[:, :, 0], psi[:, :, 1]

    def matrix_element(a, op, b):
        return np.einsum("ti,tij,tj->t", a.conj(), op, b)

    v_eps = np.zeros((len(t), 2, 2), dtype=complex)
    v_eps[:, 0, 1] = err.epsilon * omega
    v_eps[:, 1, 0] = err.epsilon * np.conj(omega)
    v_eta = np.broadcast_to(0.5 * err.eta * omega_m * SIGMA_Z, (len(t), 2, 2))
    return ErrorIntegrands(
        t,
        matrix_element(p1, v_eps, p2),
        matrix_element(p1, v_eta, p2),
        matrix_element(p1, v_eps, p1).real,
        matrix_element(p1, v_eta, p1).real,
        tuple(segs),
    )


def perturbative_fidelity(ints: ErrorIntegrands) -> float:
    e_tot = ints.integral(ints.e)
    g_tot = ints.integral(ints.g)
    return float(1.0 - 0.5 * abs(e_tot) ** 2 - 0.5 * abs(g_tot) ** 2)


def _cost_terms(ints: ErrorIntegrands, kind: str) -> float:
    e = ints.e_eps if kind == "eps" else ints.e_eta
    g = ints.g_eps if kind == "eps" else ints.g_eta
    return float(
        abs(ints.integral(e)) + abs(ints.integral(g.real)) + abs(ints.integral(g.imag))
    )


def cost_from_integrands(ints: ErrorIntegrands, which: Which) -> float:
    """Robustness cost from integrands evaluated at unit error strengths."""
    if which == "both":
        return _cost_terms(ints, "eps") + _cost_terms(ints, "eta")
    if which not in ("eps", "eta"):
        raise ValueError(f"unknown error kind {which!r}")
    return _cost_terms(ints, which)


def cost(params: AnsatzParams, which: Which, grid: int = DEFAULT_GRID,
         omega_m: Optional[float] = None) -> float:
    """Sum of absolute first-order error integrals at unit error strength."""
    return cost_from_integrands(integrands(params, ErrorModel(1.0, 1.0), grid, omega_m), which)


def numeric_cost(field: ControlField, target: GateTarget, which: Which,
                 steps: int = DEFAULT_STEPS, omega_m: Optional[float] = None) -> float:
    """Same cost for an arbitrary drive, from propagated states."""
    ints = numeric_integrands(field, target, ErrorModel(1.0, 1.0), steps, omega_m)
    return cost_from_integrands(ints, which)


def exact_error_fidelity(field: ControlField, err: ErrorModel, steps: int = DEFAULT_STEPS,
                         omega_m: Optional[float] = None) -> float:
    """``|Tr(U^+ U_err)| / 2`` from exact propagation with and without the error."""
    u = gate_unitary(field, steps)
    u_err = gate_unitary(field, steps, err.epsilon, err.eta, omega_m)
    return trace_fidelity(u_err, u)
