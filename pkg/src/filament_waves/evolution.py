"""Time integration of the scalar wave equation and of the full filament system.

Scalar equation::

    w_t = i (w_ss - w / |w|^2)

conserves mass ``int |w|^2 ds`` and energy ``int |w_s|^2 + log|w|^2 ds``.

Filament system (``Gamma_0 = -kappa``, ``Gamma_j = 1``)::

    d/dt u_j = i (Gamma_j u_j,ss + sum_{i != j} Gamma_i (u_j - u_i) / |u_j - u_i|^2)

with the interaction weighted by the circulation of the *other* filament.
That is the convention under which ``u_j = w a_j`` reduces to the scalar
equation whenever ``a_j`` is a central configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .central import CentralConfig
from .continuation import BranchPoint
from .errors import CollisionError, ConfigurationError, PreconditionError, SingularityError
from .field import Grid2D, SymmetricField, evaluate_symmetric
from .residual import ResidualWorkspace, full_residual

W_FLOOR = 1e-8
COLLISION_GUARD = 1e-6


def wavenumbers(Ns: int) -> np.ndarray:
    return np.fft.fftfreq(Ns, d=1.0 / Ns)


def s_grid(Ns: int) -> np.ndarray:
    return 2 * np.pi * np.arange(Ns) / Ns


@dataclass(frozen=True)
class ScalarWave:
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        w = np.array(self.values, dtype=complex).ravel()
        if w.size < 4:
            raise ConfigurationError("need at least 4 spatial samples")
        w.flags.writeable = False
        object.__setattr__(self, "values", w)
        _check_floor(w)

    @property
    def Ns(self) -> int:
        return self.values.size

    @property
    def s(self) -> np.ndarray:
        return s_grid(self.Ns)


def _check_floor(w: np.ndarray) -> None:
    m = float(np.min(np.abs(w)))
    if m <= W_FLOOR:
        raise SingularityError(f"|w| = {m:.3e} fell below the floor {W_FLOOR:g}")


def mass(w: np.ndarray) -> float:
    w = np.asarray(w)
    return float(2 * np.pi * np.mean(np.abs(w) ** 2))


def energy(w: np.ndarray) -> float:
    w = np.asarray(w)
    ws = np.fft.ifft(1j * wavenumbers(w.size) * np.fft.fft(w))
    return float(2 * np.pi * np.mean(np.abs(ws) ** 2 + np.log(np.abs(w) ** 2)))


class PDEStepper:
    """Strang splitting: half nonlinear phase rotation, exact linear step, half rotation.

    The nonlinear sub-flow ``w_t = -i w/|w|^2`` keeps ``|w|`` fixed, so it is
    ``w -> w exp(-i h / |w|^2)``; the linear sub-flow is the multiplier
    ``exp(-i k^2 dt)``.
    """

    def __init__(self, Ns: int, dt: float):
        self.dt = dt
        self.lin = np.exp(-1j * wavenumbers(Ns) ** 2 * dt)

    def step(self, w: np.ndarray) -> np.ndarray:
        half = 0.5 * self.dt
        w = w * np.exp(-1j * half / (w.real**2 + w.imag**2))
        w = np.fft.ifft(self.lin * np.fft.fft(w))
        w = w * np.exp(-1j * half / (w.real**2 + w.imag**2))
        return w


def step_pde(w: ScalarWave, dt: float) -> ScalarWave:
    out = PDEStepper(w.Ns, dt).step(w.values)
    return ScalarWave(out, w.time + dt)


def evolve_pde(w: ScalarWave, dt: float, T: float, record_every: int | None = None):
    """Integrate to time ``T`` (the last step is shortened to land on ``T``).

    Returns the final wave and, if ``record_every`` is set, rows ``(t, mass, energy)``.
    """
    n = int(np.floor((T - w.time) / dt + 1e-9))
    rest = (T - w.time) - n * dt
    stepper = PDEStepper(w.Ns, dt)
    v = np.array(w.values)
    t = w.time
    rows = [(t, mass(v), energy(v))] if record_every else None
    for i in range(n):
        v = stepper.step(v)
        t = w.time + (i + 1) * dt
        if record_every and (i + 1) % record_every == 0:
            _check_floor(v)
            rows.append((t, mass(v), energy(v)))
    if rest > 1e-14:
        v = PDEStepper(w.Ns, rest).step(v)
        t = T
    out = ScalarWave(v, t)
    if record_every and rows[-1][0] != t:
        rows.append((t, mass(v), energy(v)))
    return (out, rows) if record_every else out


# --------------------------------------------------------------------------
# filament system


@dataclass(frozen=True)
class FilamentState:
    config: CentralConfig
    curves: np.ndarray = field(repr=False)   # (n+1, Ns); row 0 is the central filament
    time: float = 0.0

    def __post_init__(self):
        c = np.array(self.curves, dtype=complex)
        if c.ndim != 2 or c.shape[0] != self.config.n + 1:
            raise ConfigurationError(f"curves must have shape (n+1, Ns), got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "curves", c)
        check_separation(c)

    @classmethod
    def homographic(cls, config: CentralConfig, w: np.ndarray, time: float = 0.0) -> "FilamentState":
        w = np.asarray(w, dtype=complex)
        return cls(config, np.outer(config.all_points, w), time)


def check_separation(curves: np.ndarray, guard: float = COLLISION_GUARD) -> None:
    n1 = curves.shape[0]
    d = np.abs(curves[:, None, :] - curves[None, :, :])
    d[np.arange(n1), np.arange(n1)] = np.inf
    idx = np.unravel_index(np.argmin(d), d.shape)
    if d[idx] < guard:
        raise CollisionError(
            f"filaments {idx[0]} and {idx[1]} within {d[idx]:.3e} at s index {idx[2]}",
            pair=(int(idx[0]), int(idx[1])), s_index=int(idx[2]), distance=float(d[idx]),
        )


def interaction(curves: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """``i sum_{i != j} Gamma_i (u_j - u_i)/|u_j - u_i|^2`` for every filament ``j``."""
    diff = curves[:, None, :] - curves[None, :, :]
    n1 = curves.shape[0]
    diff[np.arange(n1), np.arange(n1)] = np.inf
    return 1j * np.sum(gammas[None, :, None] / np.conj(diff), axis=1)


class FilamentStepper:
    """Integrating-factor RK4 with the exact flow of ``i Gamma_j d_ss`` per filament."""

    def __init__(self, config: CentralConfig, Ns: int, dt: float):
        self.gammas = config.circulations
        self.dt = dt
        k2 = wavenumbers(Ns) ** 2
        self.E = np.exp(-0.5j * dt * self.gammas[:, None] * k2[None, :])
        self.E2 = self.E**2

    def _N(self, uh: np.ndarray) -> np.ndarray:
        u = np.fft.ifft(uh, axis=-1)
        return self.dt * np.fft.fft(interaction(u, self.gammas), axis=-1)

    def step(self, u: np.ndarray) -> np.ndarray:
        E, E2 = self.E, self.E2
        uh = np.fft.fft(u, axis=-1)
        a = self._N(uh)
        b = self._N(E * (uh + a / 2))
        c = self._N(E * uh + b / 2)
        d = self._N(E2 * uh + E * c)
        uh = E2 * uh + (E2 * a + 2 * E * (b + c) + d) / 6
        return np.fft.ifft(uh, axis=-1)


def step_filaments(state: FilamentState, dt: float) -> FilamentState:
    out = FilamentStepper(state.config, state.curves.shape[1], dt).step(np.array(state.curves))
    return FilamentState(state.config, out, state.time + dt)


def filament_invariants(curves: np.ndarray, gammas: np.ndarray) -> tuple[complex, float]:
    """``sum Gamma_j int u_j ds`` and ``sum Gamma_j int |u_j|^2 ds``."""
    lin = complex(2 * np.pi * np.sum(gammas * np.mean(curves, axis=1)))
    quad = float(2 * np.pi * np.sum(gammas * np.mean(np.abs(curves) ** 2, axis=1)))
    return lin, quad


def filament_energy(curves: np.ndarray, gammas: np.ndarray) -> float:
    """Hamiltonian ``sum Gamma_j^2 int |u_j,s|^2 - sum_{i<j} Gamma_i Gamma_j int log|u_i - u_j|^2``.

    The system is ``Gamma_j d/dt u_j = -i dH/d conj(u_j)``, so ``H`` is conserved.
    """
    Ns = curves.shape[1]
    us = np.fft.ifft(1j * wavenumbers(Ns) * np.fft.fft(curves, axis=-1), axis=-1)
    kin = np.sum(gammas**2 * np.mean(np.abs(us) ** 2, axis=1))
    pot = 0.0
    for i in range(curves.shape[0]):
        for j in range(i + 1, curves.shape[0]):
            pot += gammas[i] * gammas[j] * np.mean(np.log(np.abs(curves[i] - curves[j]) ** 2))
    return float(2 * np.pi * (kin - pot))


def evolve_filaments(state: FilamentState, dt: float, T: float, check_every: int = 1,
                     record_every: int | None = None):
    """Integrate the filament system to ``T``; separation is checked every ``check_every`` steps.

    With ``record_every`` set, also returns rows ``(t, sum Gamma_j int |u_j|^2, H)``.
    """
    n = int(np.floor((T - state.time) / dt + 1e-9))
    rest = (T - state.time) - n * dt
    stepper = FilamentStepper(state.config, state.curves.shape[1], dt)
    gam = state.config.circulations
    u = np.array(state.curves)

    def row(t, u):
        return (t, filament_invariants(u, gam)[1], filament_energy(u, gam))

    rows = [row(state.time, u)] if record_every else None
    t = state.time
    for i in range(n):
        u = stepper.step(u)
        t = state.time + (i + 1) * dt
        if (i + 1) % check_every == 0:
            check_separation(u)
        if record_every and (i + 1) % record_every == 0:
            rows.append(row(t, u))
    if rest > 1e-14:
        u = FilamentStepper(state.config, u.shape[1], rest).step(u)
        t = T
    out = FilamentState(state.config, u, t)
    if record_every and rows[-1][0] != t:
        rows.append(row(t, u))
    return (out, rows) if record_every else out


# --------------------------------------------------------------------------
# standing waves


def perturbation_values(v: SymmetricField, tau: float, s: np.ndarray) -> np.ndarray:
    """Complex perturbation ``x + i y`` at rescaled time ``tau`` and arclengths ``s``."""
    x, y = evaluate_symmetric(v, np.full_like(s, tau), s)
    return x + 1j * y


def reconstruct(bp: BranchPoint, cfg: CentralConfig, t: float, samples: int, q: int) -> np.ndarray:
    """Filament curves ``u_j(t, s_m) = a e^{i omega t}(a_j + a_j u(t/q, s_m))``, ``j = 0..n``.

    ``a = (-omega)^(-1/2)``; row 0 is the central filament (``a_0 = 0``).
    """
    if not bp.omega < 0:
        raise PreconditionError("omega must be negative for a real rotation amplitude")
    amp = (-bp.omega) ** -0.5
    s = s_grid(samples)
    u = perturbation_values(bp.v, t / q, s)
    rot = amp * np.exp(1j * bp.omega * t)
    return rot * np.outer(cfg.all_points, 1 + u)


def standing_wave_initial(bp: BranchPoint, q: int, samples: int, t: float = 0.0) -> np.ndarray:
    """Scalar field ``w(t, s) = a e^{i omega t}(1 + u(t/q, s))`` of a branch point."""
    amp = (-bp.omega) ** -0.5
    s = s_grid(samples)
    return amp * np.exp(1j * bp.omega * t) * (1 + perturbation_values(bp.v, t / q, s))


def ansatz_residual(bp: BranchPoint, q: int, samples: int) -> float:
    """Max-norm residual of the scalar equation for the ansatz at ``t = 0``."""
    v = bp.v
    amp = (-bp.omega) ** -0.5
    s = s_grid(samples)
    k = np.arange(v.grid.K + 1)
    j = np.arange(v.grid.J + 1)
    cs = np.cos(np.outer(s, k))
    # t = 0: x = sum X cos ks, y = 0, x_t = 0, y_t = sum j Y cos ks
    x = cs @ v.X.sum(axis=0)
    y_t = cs @ (j[:, None] * v.Y_full()).sum(axis=0)
    x_ss = cs @ (-(k**2) * v.X.sum(axis=0))
    w = amp * (1 + x)
    w_t = 1j * bp.omega * w + amp * (1j * y_t) / q
    w_ss = amp * x_ss
    r = w_t - 1j * (w_ss - w / np.abs(w) ** 2)
    return float(np.max(np.abs(r)))


def truncation_residual(bp: BranchPoint, q: int, padding: int = 4) -> float:
    """Norm of the residual content beyond the truncation ``(J, K)``.

    The solution is embedded in a grid with twice the truncation and the
    residual there is restricted to the modes the Galerkin system ignores.
    """
    g = bp.v.grid
    big = Grid2D.for_truncation(2 * g.J, 2 * g.K)
    X = np.zeros((big.J + 1, big.K + 1))
    Y = np.zeros((big.J, big.K + 1))
    X[: g.J + 1, : g.K + 1] = bp.v.X
    Y[: g.J, : g.K + 1] = bp.v.Y
    F = full_residual(SymmetricField(big, X, Y), bp.omega, ResidualWorkspace(big, q, padding))
    c = np.array(F.coeffs)
    c[:, big.J - g.J: big.J + g.J + 1, big.K - g.K: big.K + g.K + 1] = 0
    return float(np.sqrt(np.sum(np.abs(c) ** 2)))


@dataclass
class StandingWaveReport:
    deviation: float
    ansatz_residual: float
    truncation_residual: float
    mass_drift: float
    energy_drift: float
    horizon: float
    dt: float
    samples: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def validate_standing_wave(bp: BranchPoint, q: int, dt: float = 1e-4, horizon: float | None = None,
                           samples: int | None = None) -> StandingWaveReport:
    """Evolve ``w(0, s)`` with the scalar integrator and compare with the rotating ansatz.

    ``horizon`` defaults to one full period ``2 pi q``; the deviation is the max
    norm of ``w(T) - a e^{i omega T}(1 + u(T/q, s))``.
    """
    T = 2 * np.pi * q if horizon is None else horizon
    if samples is None:
        samples = max(64, 4 * bp.v.grid.K)
    w0 = standing_wave_initial(bp, q, samples)
    wT, rows = evolve_pde(ScalarWave(w0), dt, T, record_every=max(1, int(round(1.0 / dt))))
    exact = standing_wave_initial(bp, q, samples, T)
    m = np.array([r[1] for r in rows])
    e = np.array([r[2] for r in rows])
    return StandingWaveReport(
        deviation=float(np.max(np.abs(wT.values - exact))),
        ansatz_residual=ansatz_residual(bp, q, samples),
        truncation_residual=truncation_residual(bp, q),
        mass_drift=float(np.max(np.abs(m - m[0])) / max(1.0, abs(m[0]))),
        energy_drift=float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0]))),
        horizon=T, dt=dt, samples=samples,
    )
