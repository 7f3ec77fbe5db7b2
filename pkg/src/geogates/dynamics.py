"""Fixed-step RK4 propagation of unitaries and density matrices, and gate fidelities.

Hamiltonian samplers are callables ``h_of_t(t)`` that accept an array of times
and return ``t.shape + (d, d)``. A *schedule* is a list of
``(h_of_t, start, stop)`` smooth stretches propagated back to back, which is
how piecewise drives with jumps are handled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_STEPS = 4000

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_r = 1 / np.sqrt(2)
SIX_STATES = np.array(
    [[1, 0], [0, 1], [_r, _r], [_r, -_r], [_r, 1j * _r], [_r, -1j * _r]], dtype=complex
)

Schedule = Sequence[tuple[Callable, float, float]]


def _sample(h_of_t: Callable, times: np.ndarray) -> np.ndarray:
    h = np.asarray(h_of_t(times))
    if h.ndim == 2:
        # sampler is not vectorized
        h = np.stack([np.asarray(h_of_t(t)) for t in times])
    return h.astype(complex, copy=False)


def _half_step_samples(h_of_t, t0, t1, steps):
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = (t1 - t0) / steps
    times = t0 + 0.5 * dt * np.arange(2 * steps + 1)
    return _sample(h_of_t, times), dt


def propagate_unitary(h_of_t: Callable, t0: float, t1: float, steps: int = DEFAULT_STEPS,
                      u0=None, return_path: bool = False):
    """Solve ``dU/dt = -i H(t) U`` with classical RK4.

    ``u0`` defaults to the identity; it may also be a ``(d, k)`` block of
    state columns. With ``return_path`` the value after every step is
    returned as well, shape ``(steps + 1,) + u0.shape``.
    """
    hs, dt = _half_step_samples(h_of_t, t0, t1, steps)
    d = hs.shape[-1]
    u = np.eye(d, dtype=complex) if u0 is None else np.array(u0, dtype=complex)
    mh = -1j * hs
    path = [u] if return_path else None
    for i in range(steps):
        a, m, b = mh[2 * i], mh[2 * i + 1], mh[2 * i + 2]
        k1 = a @ u
        k2 = m @ (u + 0.5 * dt * k1)
        k3 = m @ (u + 0.5 * dt * k2)
        k4 = b @ (u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if return_path:
            path.append(u)
    if return_path:
        return u, np.stack(path)
    return u


def _split_steps(schedule: Schedule, steps: int) -> list[int]:
    total = sum(stop - start for _, start, stop in schedule)
    return [max(1, int(round(steps * (stop - start) / total))) for _, start, stop in schedule]


def evolve_unitary(schedule: Schedule, steps: int = DEFAULT_STEPS, u0=None) -> np.ndarray:
    """Propagate through every stretch of a schedule; ``steps`` is split by duration."""
    u = u0
    for (h, start, stop), n in zip(schedule, _split_steps(schedule, steps)):
        u = propagate_unitary(h, start, stop, n, u0=u)
    return u


@dataclass(frozen=True)
class NoiseModel:
    """Collapse operators with their rates (angular frequency)."""

    collapse_ops: tuple[tuple[np.ndarray, float], ...] = ()

    def __post_init__(self):
        ops = tuple((np.asarray(a, dtype=complex), float(rate)) for a, rate in self.collapse_ops)
        for _, rate in ops:
            if rate < 0:
                raise ValueError(f"collapse rate must be non-negative, got {rate}")
        object.__setattr__(self, "collapse_ops", ops)

    def active(self) -> tuple[tuple[np.ndarray, float], ...]:
        return tuple((a, r) for a, r in self.collapse_ops if r > 0)


def qubit_noise(gamma_minus: float, gamma_z: float) -> NoiseModel:
    """Decay ``|0><1|`` and dephasing ``(|1><1| - |0><0|)/2``."""
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = 0.5 * np.array([[-1, 0], [0, 1]], dtype=complex)
    return NoiseModel(((sm, gamma_minus), (sz, gamma_z)))


NOISELESS = NoiseModel()


class _LindbladStepper:
    def __init__(self, noise: NoiseModel, dim: int):
        ops = noise.active()
        self.anti = np.zeros((dim, dim), dtype=complex)
        if ops:
            self.jump = np.stack([np.sqrt(r) * a for a, r in ops])
            self.jump_dag = np.conj(np.transpose(self.jump, (0, 2, 1)))
            for a, r in ops:
                self.anti += r * (a.conj().T @ a)
        else:
            self.jump = None

    def rhs(self, k, rho):
        # rho is Hermitian, so rho K^dag = (K rho)^dag
        x = k @ rho
        out = -1j * (x - np.conj(np.swapaxes(x, -1, -2)))
        if self.jump is not None:
            js = self.jump @ rho[..., None, :, :] @ self.jump_dag
            out = out + js.sum(axis=-3)
        return out


def propagate_lindblad(h_of_t: Callable, noise: NoiseModel, rho0, t0: float, t1: float,
                       steps: int = DEFAULT_STEPS, *, return_defect: bool = False):
    """RK4 solution of the Lindblad master equation.

    ``drho/dt = -i[H, rho] + sum_j G_j (A_j rho A_j^+ - {A_j^+ A_j, rho}/2)``.
    ``rho0`` is one Hermitian matrix or a batch ``(..., d, d)``. Hermiticity
    is restored after each step; the largest defect removed that way is
    returned alongside when ``return_defect`` is set.
    """
    hs, dt = _half_step_samples(h_of_t, t0, t1, steps)
    rho = np.array(rho0, dtype=complex)
    d = rho.shape[-1]
    stepper = _LindbladStepper(noise, d)
    ks = hs - 0.5j * stepper.anti
    defect = 0.0
    for i in range(steps):
        a, m, b = ks[2 * i], ks[2 * i + 1], ks[2 * i + 2]
        k1 = stepper.rhs(a, rho)
        k2 = stepper.rhs(m, rho + 0.5 * dt * k1)
        k3 = stepper.rhs(m, rho + 0.5 * dt * k2)
        k4 = stepper.rhs(b, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho_dag = np.conj(np.swapaxes(rho, -1, -2))
        if return_defect:
            defect = max(defect, float(np.max(np.abs(rho - rho_dag))))
        rho = 0.5 * (rho + rho_dag)
    if return_defect:
        return rho, defect
    return rho


def lindblad_generator(h: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Liouvillian acting on row-major ``vec(rho)``; ``h`` may be a batch ``(..., d, d)``."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[-1]
    eye = np.eye(d)
    gen = -1j * (_kron(h, eye) - _kron(eye, np.swapaxes(h, -1, -2)))
    for a, rate in noise.active():
        ada = a.conj().T @ a
        gen = gen + rate * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
    return gen


def _kron(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    batch = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(batch + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1]))


def propagate_superoperator(h_of_t: Callable, noise: NoiseModel, t0: float, t1: float,
                            steps: int = DEFAULT_STEPS, lam0=None, chunk: int = 2048) -> np.ndarray:
    """RK4 dynamical map ``vec(rho(t1)) = Lambda vec(rho(t0))``.

    Cheaper than propagating many density matrices when the input set is
    larger than ``d^2``; generators are built in chunks to bound memory.
    """
    dt = (t1 - t0) / steps
    lam = None if lam0 is None else np.array(lam0, dtype=complex)
    for first in range(0, steps, chunk):
        n = min(chunk, steps - first)
        times = t0 + dt * first + 0.5 * dt * np.arange(2 * n + 1)
        gens = lindblad_generator(_sample(h_of_t, times), noise)
        if lam is None:
            lam = np.eye(gens.shape[-1], dtype=complex)
        for i in range(n):
            a, m, b = gens[2 * i], gens[2 * i + 1], gens[2 * i + 2]
            k1 = a @ lam
            k2 = m @ (lam + 0.5 * dt * k1)
            k3 = m @ (lam + 0.5 * dt * k2)
            k4 = b @ (lam + dt * k3)
            lam = lam + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return lam


def apply_superoperator(lam: np.ndarray, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[-1]
    out = (lam @ rho.reshape(rho.shape[:-2] + (d * d,))[..., None])[..., 0]
    return out.reshape(rho.shape)


def evolve_lindblad(schedule: Schedule, noise: NoiseModel, rho0, steps: int = DEFAULT_STEPS):
    rho = rho0
    for (h, start, stop), n in zip(schedule, _split_steps(schedule, steps)):
        rho = propagate_lindblad(h, noise, rho, start, stop, n)
    return rho


def embed_states(states: np.ndarray, dim: int) -> np.ndarray:
    """Pad qubit state vectors with zeros up to ``dim`` levels."""
    out = np.zeros(states.shape[:-1] + (dim,), dtype=complex)
    out[..., : states.shape[-1]] = states
    return out


def six_state_fidelity_from_outputs(rhos: np.ndarray, target: np.ndarray) -> float:
    """Average of ``<Psi_l| U^+ rho_l U |Psi_l>`` given the six output states."""
    d = rhos.shape[-1]
    ideal = embed_states(SIX_STATES @ np.asarray(target).T, d)
    vals = np.einsum("li,lij,lj->l", ideal.conj(), rhos, ideal)
    return float(np.mean(vals.real))


def fidelity_six_state(field_or_schedule, noise: NoiseModel, target: np.ndarray,
                       steps: int = DEFAULT_STEPS) -> float:
    """Six-state average gate fidelity of a (noisy) drive against a qubit target.

    Accepts a two-level ``ControlField`` or any schedule; for models with more
    than two levels the qubit occupies the lowest two and leakage counts
    against the fidelity.
    """
    schedule = _as_schedule(field_or_schedule)
    dim = _sample(schedule[0][0], np.array([schedule[0][1]])).shape[-1]
    psi = embed_states(SIX_STATES, dim)
    rho0 = np.einsum("li,lj->lij", psi, psi.conj())
    rhos = evolve_lindblad(schedule, noise, rho0, steps)
    return six_state_fidelity_from_outputs(rhos, target)


def _as_schedule(obj) -> Schedule:
    from .controls import ControlField, two_level_schedule

    if isinstance(obj, ControlField):
        return two_level_schedule(obj)
    return obj


def trace_fidelity(u_actual: np.ndarray, u_target: np.ndarray) -> float:
    """Phase-insensitive overlap ``|Tr(U_target^+ U)| / d``."""
    u_actual = np.asarray(u_actual)
    u_target = np.asarray(u_target)
    if u_actual.shape != u_target.shape:
        raise ValueError(f"dimension mismatch: {u_actual.shape} vs {u_target.shape}")
    return float(abs(np.trace(u_target.conj().T @ u_actual)) / u_target.shape[0])


def gate_unitary(field, steps: int = DEFAULT_STEPS, eps: float = 0.0, eta: float = 0.0,
                 omega_m=None) -> np.ndarray:
    """Final unitary of a two-level ``ControlField``, optionally with static errors."""
    from .controls import two_level_schedule

    return evolve_unitary(two_level_schedule(field, eps, eta, omega_m), steps)

