"""Transmon device models.

Units: angular frequencies in rad/us and times in us, so ``mhz(10)`` is
2 pi x 10 MHz. Abstract drives (peak amplitude 1) are mapped onto device time
scales here.

Single qubit: the three-level Hamiltonian ``(1/2) B.S - alpha |2><2|``
restricted to ``{|0>, |1>}`` equals ``sigma_x H sigma_x`` for the two-level
drive ``H`` when ``B = 2 (Re Omega, Im Omega, -Delta)``, so device targets are
the abstract gates conjugated by ``sigma_x``.

Two qubits: the interaction-picture model on ``|00>, |01>, |10>, |11>,
|02>, |20>`` with a parametrically modulated coupler. Its ``n = 1`` sideband
drives the ``|02> <-> |11>`` pair as an effective qubit with ``|02>`` in the
role of ``|0>``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import j1

from .controls import ControlField, DragField, FieldPiece, drag_components, drag_hamiltonian_from_b
from .dynamics import (
    DEFAULT_STEPS,
    SIGMA_X,
    SIX_STATES,
    NoiseModel,
    apply_superoperator,
    evolve_unitary,
    fidelity_six_state,
    propagate_superoperator,
    propagate_unitary,
    trace_fidelity,
)
from .robustness import ErrorModel
from .trajectory import GateTarget

TWO_PI = 2.0 * np.pi


def mhz(f: float) -> float:
    """Frequency in MHz to angular frequency in rad/us."""
    return TWO_PI * f


class InfeasibleDriveError(ValueError):
    """Requested drive amplitude exceeds what the modulated coupler can reach."""

    def __init__(self, message: str, max_omega: float):
        super().__init__(message)
        self.max_omega = max_omega


# ---------------------------------------------------------------- single qubit


@dataclass(frozen=True)
class TransmonParams:
    omega_m: float = mhz(10.0)
    alpha: float = mhz(300.0)
    gamma_minus: float = mhz(0.002)
    gamma_z: float = mhz(0.002)

    def __post_init__(self):
        if self.omega_m <= 0 or self.alpha <= 0:
            raise ValueError("omega_m and alpha must be positive")
        if self.gamma_minus < 0 or self.gamma_z < 0:
            raise ValueError("decoherence rates must be non-negative")


def _transmon_ops():
    sm = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex)
    sz = np.diag([0.0, 1.0, 2.0]).astype(complex)
    return sm, sz


def transmon_noise(params: TransmonParams) -> NoiseModel:
    sm, sz = _transmon_ops()
    return NoiseModel(((sm, params.gamma_minus), (sz, params.gamma_z)))


def _amplified(field: ControlField, k: float) -> ControlField:
    def wrap(fn):
        def scaled(t):
            d, o, od = fn(t)
            return k * d, k * o, k * od

        return scaled

    pieces = tuple(FieldPiece(p.start, p.stop, wrap(p.fn)) for p in field.pieces)
    return ControlField(field.t, k * field.delta, k * field.omega, pieces)


def transmon_drive(field: ControlField, params: TransmonParams, unit: float = 1.0) -> DragField:
    """Map an abstract two-level drive onto the transmon.

    Abstract amplitude ``unit`` becomes ``omega_m``: the drive is sped up by
    ``s = omega_m / (2 unit)`` and doubled, so the qubit block realizes the
    same gate (conjugated by ``sigma_x``) in time ``duration / s``.
    """
    s = params.omega_m / (2.0 * unit)
    return DragField(_amplified(field.rescaled(s), 2.0), params.alpha)


def device_target(target: Union[GateTarget, np.ndarray]) -> np.ndarray:
    u = target.unitary() if isinstance(target, GateTarget) else np.asarray(target, dtype=complex)
    return SIGMA_X @ u @ SIGMA_X


def _default_transmon_steps(dfield: DragField) -> int:
    # RK4 stays accurate at roughly half a radian of phase per step
    rate = dfield.alpha + np.max(np.abs(dfield.field.omega)) + np.max(np.abs(dfield.field.delta))
    return max(DEFAULT_STEPS, int(2.0 * rate * dfield.field.duration))


def transmon_schedule(dfield: DragField, params: TransmonParams, err: ErrorModel = ErrorModel(),
                      drag: bool = True, errors_before_drag: bool = False) -> list:
    """Three-level Hamiltonian pieces with optional DRAG and operational errors.

    By default the Rabi error scales the full transverse drive (bare plus
    correction) and the detuning error ``eta omega_m (|1><1| + 2|2><2|)/2`` is
    added afterwards. With ``errors_before_drag`` the correction is computed
    from the already miscalibrated drive.
    """
    eps, eta = err.epsilon, err.eta
    shift = 0.5 * eta * params.omega_m * np.diag([0.0, 1.0, 2.0])
    alpha = dfield.alpha

    def make_h(fn):
        def h(t):
            d, o, od = fn(t)
            if errors_before_drag:
                # eta shifts B_z by -eta omega_m / 2 once the identity part is dropped
                b0, bd = drag_components(d, (1 + eps) * o, (1 + eps) * od, alpha,
                                         bz_offset=-0.5 * eta * params.omega_m)
                b = b0 + bd if drag else b0
                return drag_hamiltonian_from_b(b, alpha)
            b0, bd = drag_components(d, o, od, alpha)
            b = b0 + bd if drag else b0.copy()
            b[:2] = (1 + eps) * b[:2]
            return drag_hamiltonian_from_b(b, alpha) + shift

        return h

    return dfield.field.schedule(make_h)


def single_qubit_gate_sim(dfield: DragField, params: TransmonParams, err: ErrorModel,
                          target: Union[GateTarget, np.ndarray], *, drag: bool = True,
                          errors_before_drag: bool = False, noise: Optional[NoiseModel] = None,
                          steps: Optional[int] = None) -> float:
    """Six-state fidelity of the three-level transmon gate.

    ``target`` is the abstract gate; the comparison uses its
    ``sigma_x``-conjugated device form. Population left in ``|2>`` counts as
    error. ``noise`` defaults to the rates in ``params``.
    """
    schedule = transmon_schedule(dfield, params, err, drag, errors_before_drag)
    noise = transmon_noise(params) if noise is None else noise
    steps = _default_transmon_steps(dfield) if steps is None else steps
    return fidelity_six_state(schedule, noise, device_target(target), steps)


def leakage(dfield: DragField, params: TransmonParams, drag: bool = True,
            steps: Optional[int] = None) -> float:
    """Mean final ``|2>`` population over the six input states, without decoherence."""
    schedule = transmon_schedule(dfield, params, drag=drag)
    steps = _default_transmon_steps(dfield) if steps is None else steps
    psi = np.zeros((3, 6), dtype=complex)
    psi[:2] = SIX_STATES.T
    out = evolve_unitary(schedule, steps, u0=psi)
    return float(np.mean(np.abs(out[2]) ** 2))


# ---------------------------------------------------------------- two qubits

J1_ARGMAX = 1.8411837813406593
J1_MAX = float(j1(J1_ARGMAX))

# model basis: |00>, |01>, |10>, |11>, |02>, |20>
BASIS = ("00", "01", "10", "11", "02", "20")
I00, I01, I10, I11, I02, I20 = range(6)


@dataclass(frozen=True)
class TwoQubitParams:
    g12: float = mhz(4.5)
    delta12: float = mhz(700.0)
    alpha1: float = mhz(300.0)
    alpha2: float = mhz(200.0)
    gamma_minus1: float = mhz(0.002)
    gamma_z1: float = mhz(0.002)
    gamma_minus2: float = mhz(0.002)
    gamma_z2: float = mhz(0.002)

    def __post_init__(self):
        if self.g12 <= 0:
            raise ValueError("coupling must be positive")
        for name in ("gamma_minus1", "gamma_z1", "gamma_minus2", "gamma_z2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.delta12 == 0 or self.g12 / abs(self.delta12) > 0.1:
            warnings.warn("coupling is not small compared with the qubit detuning", stacklevel=2)

    @property
    def max_omega(self) -> float:
        """Largest two-level drive amplitude ``|Omega|`` the sideband can supply."""
        return float(np.sqrt(2.0) * self.g12 * J1_MAX)


def two_qubit_noise(params: TwoQubitParams) -> NoiseModel:
    """Per-qubit decay and dephasing, projected onto the six-state model space."""
    sm, sz = _transmon_ops()
    eye = np.eye(3)
    proj = np.zeros((6, 9))
    for k, label in enumerate(BASIS):
        proj[k, 3 * int(label[0]) + int(label[1])] = 1.0
    ops = []
    for op, rate in ((np.kron(sm, eye), params.gamma_minus1), (np.kron(sz, eye), params.gamma_z1),
                     (np.kron(eye, sm), params.gamma_minus2), (np.kron(eye, sz), params.gamma_z2)):
        ops.append((proj @ op @ proj.T, rate))
    return NoiseModel(tuple(ops))


def j1_inverse(x, tol: float = 1e-12) -> np.ndarray:
    """Solve ``J1(beta) = x`` on ``[0, 1.8412]`` by vectorized bisection."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > J1_MAX * (1 + 1e-12)):
        raise ValueError("J1 inverse needs 0 <= x <= max J1")
    lo = np.zeros_like(x)
    hi = np.full_like(x, J1_ARGMAX)
    while np.max(hi - lo, initial=0.0) > tol:
        mid = 0.5 * (lo + hi)
        below = j1(mid) < x
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ParametricDrive:
    """Coupler modulation ``beta sin(int nu + chi)`` sampled on ``t``.

    ``phase_offset`` is ``int_0^t Delta'`` so that ``int nu = (delta12 +
    alpha2) t + phase_offset``.
    """

    t: np.ndarray
    beta: np.ndarray
    chi: np.ndarray
    nu: np.ndarray
    delta_prime: np.ndarray
    phase_offset: np.ndarray
    carrier: float

    def __post_init__(self):
        if np.any(self.beta < 0) or np.any(self.beta > J1_ARGMAX + 1e-9):
            raise ValueError("modulation depth outside [0, 1.8412]")

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def at(self, t):
        """``(beta, chi, int nu)`` at arbitrary times by linear interpolation (exact on nodes)."""
        t = np.asarray(t, dtype=float)
        beta = np.interp(t, self.t, self.beta)
        chi = np.interp(t, self.t, self.chi)
        return beta, chi, self.carrier * t + np.interp(t, self.t, self.phase_offset)

    def effective(self, g12: float):
        """Rebuild the sideband two-level drive ``(Delta, Omega)``."""
        omega = np.sqrt(2.0) * g12 * j1(self.beta) * np.exp(1j * self.chi)
        return 0.5 * self.delta_prime, omega


def map_controls_to_drive(field: ControlField, params: TwoQubitParams,
                          steps: int = 4000) -> ParametricDrive:
    """Modulation that makes the ``|02>, |11>`` sideband reproduce ``field``.

    Sampled on ``2 steps + 1`` points so RK4 half steps land on nodes. The
    field must already be in device units and a single smooth piece.
    """
    if len(field.pieces) != 1:
        raise ValueError("two-qubit mapping needs a single smooth drive piece")
    piece = field.pieces[0]
    t = np.linspace(piece.start, piece.stop, 2 * steps + 1)
    delta, omega, _ = piece.fn(t)
    peak = float(np.max(np.abs(omega)))
    if peak > params.max_omega * (1 + 1e-12):
        raise InfeasibleDriveError(
            f"drive peak {peak:.6g} rad/us exceeds the coupler limit {params.max_omega:.6g} rad/us",
            params.max_omega,
        )
    beta = j1_inverse(np.minimum(np.abs(omega) / (np.sqrt(2.0) * params.g12), J1_MAX))
    # the sideband coupling <11|H|02> comes out as conj(Omega) with this sign
    chi = np.unwrap(np.angle(omega))
    delta_prime = 2.0 * np.asarray(delta, dtype=float)
    offset = cumulative_simpson(delta_prime, x=t, initial=0.0)
    carrier = params.delta12 + params.alpha2
    return ParametricDrive(t, beta, chi, carrier + delta_prime, delta_prime, offset, carrier)


def two_qubit_interaction_hamiltonian(params: TwoQubitParams, drive: ParametricDrive, t,
                                      err: ErrorModel = ErrorModel()) -> np.ndarray:
    """Interaction-picture Hamiltonian on the six-state model, shape ``t.shape + (6, 6)``.

    The Rabi error scales the coupling ``g12 -> (1 + eps) g12``; the detuning
    error adds ``eta g12 (|11><11| + |02><02|) / 2``.
    """
    t = np.asarray(t, dtype=float)
    beta, chi, nu_int = drive.at(t)
    g = (1 + err.epsilon) * params.g12
    mod = g * np.exp(-1j * beta * np.sin(nu_int + chi))
    d12, a1, a2 = params.delta12, params.alpha1, params.alpha2
    h = np.zeros(t.shape + (6, 6), dtype=complex)
    h[..., I10, I01] = np.exp(1j * d12 * t) * mod
    h[..., I11, I02] = np.sqrt(2.0) * np.exp(1j * (d12 + a2) * t) * mod
    h[..., I20, I11] = np.sqrt(2.0) * np.exp(1j * (d12 - a1) * t) * mod
    h = h + np.conj(np.swapaxes(h, -1, -2))
    shift = 0.5 * err.eta * params.g12
    h[..., I11, I11] += shift
    h[..., I02, I02] += shift
    return h


def effective_hamiltonian(params: TwoQubitParams, field: ControlField, t,
                          err: ErrorModel = ErrorModel()) -> np.ndarray:
    """Sideband-only model: ``field`` acts on ``(|02>, |11>)``, other states idle."""
    delta, omega, _ = field.evaluate(t)
    omega = (1 + err.epsilon) * omega
    h = np.zeros(np.shape(t) + (6, 6), dtype=complex)
    h[..., I02, I02] = delta
    h[..., I11, I11] = -delta
    h[..., I02, I11] = omega
    h[..., I11, I02] = np.conj(omega)
    shift = 0.5 * err.eta * params.g12
    h[..., I11, I11] += shift
    h[..., I02, I02] += shift
    return h


def cp_target(phase: float = np.pi / 2) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phase)])


def cp_drive_field(field: ControlField, params: TwoQubitParams, omega_m: Optional[float] = None) -> ControlField:
    """Scale an abstract drive to device time; ``omega_m`` defaults to 90% of the coupler limit."""
    omega_m = 0.9 * params.max_omega if omega_m is None else omega_m
    return field.rescaled(omega_m / field.omega_max)


def _product_states() -> np.ndarray:
    psi = np.einsum("ai,bj->abij", SIX_STATES, SIX_STATES).reshape(36, 4)
    out = np.zeros((36, 6), dtype=complex)
    out[:, :4] = psi
    return out


def product_state_fidelity(rhos: np.ndarray, target: np.ndarray) -> float:
    """Mean ``<psi| U^+ rho U |psi>`` over the 36 products of single-qubit six-state inputs."""
    ideal = _product_states()
    ideal[:, :4] = ideal[:, :4] @ np.asarray(target).T
    vals = np.einsum("li,lij,lj->l", ideal.conj(), rhos, ideal)
    return float(np.mean(vals.real))


def _frame_correction(drive: ParametricDrive) -> np.ndarray:
    a = drive.phase_offset[-1]
    diag = np.ones(6, dtype=complex)
    diag[I02] = np.exp(-0.5j * a)
    diag[I11] = np.exp(0.5j * a)
    return np.diag(diag)


def cp_gate_sim(params: TwoQubitParams, field: ControlField, err: ErrorModel = ErrorModel(),
                steps: int = 4000, *, model: str = "full", noise: Optional[NoiseModel] = None,
                phase: float = np.pi / 2) -> float:
    """Product-state averaged fidelity of the CP gate.

    ``field`` is in device units (see ``cp_drive_field``). The full model's
    result is taken back from the frame rotating with the accumulated
    sideband detuning before comparison.
    """
    noise = two_qubit_noise(params) if noise is None else noise
    psi = _product_states()  # 36 inputs > 6^2, so propagate the dynamical map instead
    rho0 = np.einsum("li,lj->lij", psi, psi.conj())
    if model == "full":
        drive = map_controls_to_drive(field, params, steps)
        h = lambda t: two_qubit_interaction_hamiltonian(params, drive, t, err)  # noqa: E731
        lam = propagate_superoperator(h, noise, drive.t[0], drive.t[-1], steps)
        fr = _frame_correction(drive)
        rho = apply_superoperator(lam, rho0)
        rho = fr @ rho @ fr.conj().T
    elif model == "effective":
        lam = None
        for h, a, b in field.schedule(lambda fn: lambda t: effective_hamiltonian(params, field, t, err)):
            lam = propagate_superoperator(h, noise, a, b, max(1, round(steps * (b - a) / field.duration)), lam0=lam)
        rho = apply_superoperator(lam, rho0)
    else:
        raise ValueError(f"unknown model {model!r}")
    return product_state_fidelity(rho, cp_target(phase))


def cp_gate_unitary(params: TwoQubitParams, field: ControlField, err: ErrorModel = ErrorModel(),
                    steps: int = 4000, model: str = "full") -> np.ndarray:
    """Noise-free 6x6 propagator (frame-corrected for the full model)."""
    if model == "full":
        drive = map_controls_to_drive(field, params, steps)
        h = lambda t: two_qubit_interaction_hamiltonian(params, drive, t, err)  # noqa: E731
        return _frame_correction(drive) @ propagate_unitary(h, drive.t[0], drive.t[-1], steps)
    if model == "effective":
        schedule = field.schedule(lambda fn: lambda t: effective_hamiltonian(params, field, t, err))
        return evolve_unitary(schedule, steps)
    raise ValueError(f"unknown model {model!r}")


def cp_trace_fidelity(params: TwoQubitParams, field: ControlField, err: ErrorModel = ErrorModel(),
                      steps: int = 4000, model: str = "full", phase: float = np.pi / 2) -> float:
    """``|Tr(U_target^+ U)| / 4`` on the computational block."""
    u = cp_gate_unitary(params, field, err, steps, model)
    return trace_fidelity(u[:4, :4], cp_target(phase))


# ---------------------------------------------------------------- config

_TRANSMON_KEYS = ("omega_m", "alpha", "gamma_minus", "gamma_z")
_TWO_QUBIT_KEYS = ("g12", "delta12", "alpha1", "alpha2", "gamma_minus1", "gamma_z1",
                   "gamma_minus2", "gamma_z2")


def _from_mhz(cls, keys, values: dict):
    unknown = set(values) - set(keys)
    if unknown:
        raise ValueError(f"unknown device keys: {sorted(unknown)}")
    return cls(**{k: mhz(float(v)) for k, v in values.items()})


def transmon_params_from_mhz(values: dict) -> TransmonParams:
    """Build from a flat mapping of frequencies in MHz (missing keys keep defaults)."""
    return _from_mhz(TransmonParams, _TRANSMON_KEYS, values)


def two_qubit_params_from_mhz(values: dict) -> TwoQubitParams:
    return _from_mhz(TwoQubitParams, _TWO_QUBIT_KEYS, values)


def params_to_mhz(params) -> dict:
    return {k: float(v) / TWO_PI for k, v in vars(params).items()}
