"""Drive fields: reverse-engineered from a trajectory, the three-segment
single-loop reference, and the DRAG-corrected transmon drive.

Two-level Hamiltonians follow ``H = Delta sigma_z + Omega |0><1| + Omega* |1><0|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .trajectory import DEFAULT_GRID, AnsatzParams, GateTarget, evaluate

SampleFn = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class FieldPiece:
    """A smooth stretch of a drive; ``fn(t)`` returns ``(delta, omega, omega_dot)``."""

    start: float
    stop: float
    fn: SampleFn


@dataclass(frozen=True)
class ControlField:
    """Drive ``(Delta(t), Omega(t))`` sampled on ``t``.

    ``pieces`` carry the analytic evaluators used by the propagators; sampled
    arrays are what gets exported. Phase jumps live at piece boundaries.
    """

    t: np.ndarray
    delta: np.ndarray
    omega: np.ndarray
    pieces: tuple[FieldPiece, ...]

    @property
    def duration(self) -> float:
        return float(self.pieces[-1].stop - self.pieces[0].start)

    @property
    def omega_max(self) -> float:
        return float(np.max(np.abs(self.omega)))

    @property
    def breakpoints(self) -> list[float]:
        return [p.start for p in self.pieces] + [self.pieces[-1].stop]

    def evaluate(self, t):
        """``(delta, omega, omega_dot)`` at arbitrary times; boundaries belong to the later piece."""
        t = np.asarray(t, dtype=float)
        if len(self.pieces) == 1:
            return self.pieces[0].fn(t)
        starts = np.array([p.start for p in self.pieces[1:]])
        idx = np.searchsorted(starts, t, side="right")
        delta = np.zeros(t.shape)
        omega = np.zeros(t.shape, dtype=complex)
        omega_dot = np.zeros(t.shape, dtype=complex)
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if np.any(mask):
                d, o, od = piece.fn(t[mask])
                delta[mask], omega[mask], omega_dot[mask] = d, o, od
        return delta, omega, omega_dot

    def schedule(self, make_h: Callable[[SampleFn], Callable]) -> list:
        """``[(h_of_t, start, stop), ...]`` with one smooth Hamiltonian per piece."""
        return [(make_h(p.fn), p.start, p.stop) for p in self.pieces]

    def rescaled(self, rate: float) -> "ControlField":
        """Same unitary sped up by ``rate``: ``H'(t) = rate * H(rate * t)``."""
        pieces = tuple(
            FieldPiece(p.start / rate, p.stop / rate, _scaled_fn(p.fn, rate)) for p in self.pieces
        )
        return ControlField(self.t / rate, self.delta * rate, self.omega * rate, pieces)

    @classmethod
    def from_samples(cls, t, delta, omega) -> "ControlField":
        """A field known only on a grid; linear interpolation in between."""
        t = np.asarray(t, float)
        delta = np.asarray(delta, float)
        omega = np.asarray(omega, complex)
        omega_dot = np.gradient(omega, t, edge_order=2)

        def fn(tt):
            tt = np.asarray(tt, float)
            od = np.interp(tt, t, omega_dot.real) + 1j * np.interp(tt, t, omega_dot.imag)
            om = np.interp(tt, t, omega.real) + 1j * np.interp(tt, t, omega.imag)
            return np.interp(tt, t, delta), om, od

        return cls(t, delta, omega, (FieldPiece(float(t[0]), float(t[-1]), fn),))


def _scaled_fn(fn, rate):
    def scaled(t):
        d, o, od = fn(np.asarray(t) * rate)
        return d * rate, o * rate, od * rate**2

    return scaled


def _trajectory_fn(params: AnsatzParams) -> SampleFn:
    def fn(t):
        pt = evaluate(params, t, check_range=False)
        s, c = np.sin(pt.theta), np.cos(pt.theta)
        delta = 0.5 * s * s * pt.phi_dot
        rot = np.exp(-1j * pt.phi)
        w = pt.theta_dot - 1j * s * c * pt.phi_dot
        w_dot = pt.theta_ddot - 1j * (np.cos(2 * pt.theta) * pt.theta_dot * pt.phi_dot + s * c * pt.phi_ddot)
        omega = -0.5j * rot * w
        omega_dot = -0.5j * rot * (w_dot - 1j * pt.phi_dot * w)
        return delta, omega, omega_dot

    return fn


def reverse_engineer(params: AnsatzParams, grid: int = DEFAULT_GRID) -> ControlField:
    """Drive whose evolution follows the trajectory with no dynamical phase."""
    fn = _trajectory_fn(params)
    t = params.time_grid(grid)
    delta, omega, _ = fn(t)
    return ControlField(t, delta, omega, (FieldPiece(0.0, params.tau, fn),))


def hamiltonian_2level(field: ControlField, t, eps: float = 0.0, eta: float = 0.0,
                       omega_m: Optional[float] = None) -> np.ndarray:
    """Two-level Hamiltonian (shape ``t.shape + (2, 2)``), optionally with the
    amplitude error ``Omega -> (1 + eps) Omega`` and detuning error
    ``eta * omega_m * sigma_z / 2``."""
    delta, omega, _ = field.evaluate(t)
    if omega_m is None:
        omega_m = field.omega_max
    return _h2(delta, omega, eps, eta * omega_m)


def _h2(delta, omega, eps=0.0, eta_abs=0.0):
    delta = np.asarray(delta, float)
    h = np.zeros(delta.shape + (2, 2), dtype=complex)
    d = delta + 0.5 * eta_abs
    h[..., 0, 0] = d
    h[..., 1, 1] = -d
    h[..., 0, 1] = (1.0 + eps) * omega
    h[..., 1, 0] = (1.0 + eps) * np.conj(omega)
    return h


def two_level_schedule(field: ControlField, eps: float = 0.0, eta: float = 0.0,
                       omega_m: Optional[float] = None) -> list:
    """Propagation schedule for the two-level model with static errors."""
    if omega_m is None:
        omega_m = field.omega_max

    def make_h(fn):
        def h(t):
            d, o, _ = fn(t)
            return _h2(d, o, eps, eta * omega_m)

        return h

    return field.schedule(make_h)


def auxiliary_states(theta, phi) -> tuple[np.ndarray, np.ndarray]:
    """The orthonormal pair ``|mu_1>, |mu_2>`` at Bloch angles ``(theta, phi)``."""
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    mu1 = np.stack([c + 0j, s * np.exp(1j * phi)], axis=-1)
    mu2 = np.stack([s * np.exp(-1j * phi), -c + 0j], axis=-1)
    return mu1, mu2


def parallel_transport_residual(params: AnsatzParams, grid: int = DEFAULT_GRID) -> float:
    """``max_k,t |<mu_k(t)|H(t)|mu_k(t)>|`` relative to the peak drive amplitude."""
    field = reverse_engineer(params, grid)
    pt = evaluate(params, field.t)
    h = _h2(field.delta, field.omega)
    worst = 0.0
    for mu in auxiliary_states(pt.theta, pt.phi):
        e = np.einsum("ti,tij,tj->t", mu.conj(), h, mu)
        worst = max(worst, float(np.max(np.abs(e))))
    return worst / field.omega_max


# ---------------------------------------------------------------- single loop


@dataclass(frozen=True)
class SingleLoopSpec:
    """Three-segment reference gate with envelope ``omega_m sin^2(pi t / T)``.

    ``omega_m`` is the peak of the envelope; the coupling it drives in the
    two-level form is half of it, so the gate time is ``T = 4 pi / omega_m``.
    """

    theta_c: float
    phi: float
    gamma: float
    omega_m: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.theta_c <= np.pi):
            raise ValueError(f"theta_c must lie in [0, pi], got {self.theta_c}")
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive")

    @property
    def T(self) -> float:
        return 4.0 * np.pi / self.omega_m

    def running_area(self, t):
        """``int_0^t omega_m sin^2(pi t'/T) dt'``."""
        T = self.T
        return self.omega_m * (0.5 * t - T / (4 * np.pi) * np.sin(2 * np.pi * t / T))

    def _solve(self, area: float) -> float:
        T = self.T
        if area <= 0.0:
            return 0.0
        if area >= self.running_area(T):
            return T
        return brentq(lambda x: self.running_area(x) - area, 0.0, T, xtol=1e-12 * T)

    @property
    def T1(self) -> float:
        return self._solve(self.theta_c)

    @property
    def T2(self) -> float:
        return self._solve(self.theta_c + np.pi)

    @property
    def phases(self) -> tuple[float, float, float]:
        return (self.phi - np.pi / 2, self.phi + self.gamma + np.pi / 2, self.phi - np.pi / 2)

    @classmethod
    def for_target(cls, target: GateTarget, omega_m: float = 1.0, equal_peak: bool = False) -> "SingleLoopSpec":
        """Reference realizing the same rotation as ``target``.

        By default the envelope peak is ``omega_m``, the same symbol that caps
        the optimized drives, so the reference couples at ``omega_m / 2`` and
        takes ``4 pi / omega_m``. ``equal_peak`` doubles the envelope so both
        schemes share the same peak two-level coupling instead.
        """
        theta_c, phi = target.theta0, target.phi0
        angle = target.rotation_angle
        if theta_c < 0 or theta_c > np.pi:
            raise ValueError("target axis must have polar angle in [0, pi]")
        return cls(theta_c, phi, -0.5 * angle, (2.0 if equal_peak else 1.0) * omega_m)


def _segment_fn(spec: SingleLoopSpec, phase: float) -> SampleFn:
    rot = np.exp(-1j * phase)
    k = np.pi / spec.T

    def fn(t):
        t = np.asarray(t, float)
        env = 0.5 * spec.omega_m * np.sin(k * t) ** 2
        env_dot = 0.5 * spec.omega_m * k * np.sin(2 * k * t)
        return np.zeros(t.shape), env * rot, env_dot * rot

    return fn


def single_loop_build(spec: SingleLoopSpec, grid: int = DEFAULT_GRID) -> ControlField:
    """Piecewise drive of the reference scheme; the phase jumps at ``T1`` and ``T2``."""
    edges = [0.0, spec.T1, spec.T2, spec.T]
    pieces = tuple(
        FieldPiece(a, b, _segment_fn(spec, ph))
        for a, b, ph in zip(edges[:-1], edges[1:], spec.phases)
        if b > a
    )
    t = np.linspace(0.0, spec.T, int(grid) + 1)
    field = ControlField(t, np.zeros_like(t), np.zeros_like(t, dtype=complex), pieces)
    delta, omega, _ = field.evaluate(t)
    return ControlField(t, delta, omega, pieces)


def single_loop_unitary(spec: SingleLoopSpec) -> np.ndarray:
    """Closed-form final operator ``cos(gamma) + i sin(gamma) n.sigma``."""
    st, ct = np.sin(spec.theta_c), np.cos(spec.theta_c)
    n_sigma = np.array(
        [[ct, st * np.exp(-1j * spec.phi)], [st * np.exp(1j * spec.phi), -ct]], dtype=complex
    )
    return np.cos(spec.gamma) * np.eye(2) + 1j * np.sin(spec.gamma) * n_sigma


def single_loop_area(spec: SingleLoopSpec, grid: int = DEFAULT_GRID) -> float:
    """Pulse area measured like the trajectory area, i.e. ``int |Omega|`` of the two-level form."""
    total = 0.0
    for p in single_loop_build(spec, grid).pieces:
        n = max(2 * (int(grid * (p.stop - p.start) / spec.T) // 2), 2)
        t = np.linspace(p.start, p.stop, n + 1)
        total += simpson(np.abs(p.fn(t)[1]), x=t)
    return float(total)


# ---------------------------------------------------------------- DRAG

SQRT2 = np.sqrt(2.0)
S_X = np.array([[0, 1, 0], [1, 0, SQRT2], [0, SQRT2, 0]], dtype=complex)
S_Y = np.array([[0, -1j, 0], [1j, 0, -1j * SQRT2], [0, 1j * SQRT2, 0]], dtype=complex)
S_Z = np.diag([1.0, -1.0, -3.0]).astype(complex)
P_2 = np.diag([0.0, 0.0, 1.0]).astype(complex)


def drag_components(delta, omega, omega_dot, alpha: float, bz_offset: float = 0.0):
    """Bare drive ``B0`` and its correction ``Bd`` as ``(3, ...)`` arrays.

    The sign of ``Bd`` is the one that cancels first-order leakage for the
    ``-alpha |2><2|`` level shift used in ``drag_hamiltonian_from_b``.
    """
    bx, by = np.real(omega), np.imag(omega)
    bz = -np.asarray(delta, float) + bz_offset
    bx_dot, by_dot = np.real(omega_dot), np.imag(omega_dot)
    bdx = -(by_dot - bz * bx) / (2 * alpha)
    bdy = (bx_dot + bz * by) / (2 * alpha)
    b0 = np.stack([bx, by, bz])
    bd = np.stack([bdx, bdy, np.zeros_like(bdx)])
    return b0, bd


@dataclass(frozen=True)
class DragField:
    """DRAG-corrected drive built on a two-level field."""

    field: ControlField
    alpha: float

    def components(self, t):
        return drag_components(*self.field.evaluate(t), self.alpha)

    @property
    def t(self) -> np.ndarray:
        return self.field.t

    @property
    def b0(self) -> np.ndarray:
        return self.components(self.field.t)[0]

    @property
    def bd(self) -> np.ndarray:
        return self.components(self.field.t)[1]


def drag_correct(field: ControlField, alpha: float) -> DragField:
    """Attach the DRAG correction using the analytic drive derivative."""
    if alpha == 0:
        raise ValueError("DRAG correction is singular for zero anharmonicity")
    return DragField(field, float(alpha))


def numeric_drag_correction(field: ControlField, alpha: float) -> np.ndarray:
    """Correction ``(Bd_x, Bd_y)`` from centered differences of the sampled drive."""
    if alpha == 0:
        raise ValueError("DRAG correction is singular for zero anharmonicity")
    omega_dot = np.gradient(field.omega, field.t, edge_order=2)
    _, bd = drag_components(field.delta, field.omega, omega_dot, alpha)
    return bd[:2]


def drag_hamiltonian_from_b(b, alpha: float) -> np.ndarray:
    """``(1/2) b.S - alpha |2><2|`` for ``b`` of shape ``(3, ...)``."""
    b = np.asarray(b)
    h = 0.5 * (
        b[0][..., None, None] * S_X + b[1][..., None, None] * S_Y + b[2][..., None, None] * S_Z
    )
    return h - alpha * P_2


def drag_hamiltonian_3level(dfield: DragField, t, correction: bool = True) -> np.ndarray:
    """Three-level transmon Hamiltonian driven by ``B0 + Bd``."""
    b0, bd = dfield.components(t)
    b = b0 + bd if correction else b0
    return drag_hamiltonian_from_b(b, dfield.alpha)


def field_columns(field: ControlField, dfield: Optional[DragField] = None) -> dict:
    """Named sample columns for export."""
    cols = {
        "t": field.t,
        "delta": field.delta,
        "omega_re": field.omega.real,
        "omega_im": field.omega.imag,
    }
    if dfield is not None:
        bd = dfield.bd
        cols["b_dx"] = bd[0]
        cols["b_dy"] = bd[1]
    return cols
