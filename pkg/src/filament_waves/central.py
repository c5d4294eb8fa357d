"""Central configurations of n unit vortices around a central vortex of circulation -kappa.

Positions ``a_1..a_n`` (complex, ``a_0 = 0`` implicit) must satisfy

    sum_i a_i / |a_i|^2 = 0
    a_j + sum_{i != j} (a_j - a_i) / |a_j - a_i|^2 - kappa a_j / |a_j|^2 = 0.

Note ``z / |z|^2 = 1 / conj(z)``, which is what the code evaluates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateError, DivergenceError, InfeasibleError

log = logging.getLogger(__name__)

CC_TOL = 1e-11
MAX_ITER = 50


@dataclass(frozen=True)
class CentralConfig:
    n: int
    kappa: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if self.n < 2:
            raise InfeasibleError("n >= 2 required: the balance equation has no solution for n = 1")
        if pts.size != self.n:
            raise ConfigurationError(f"expected {self.n} points, got {pts.size}")
        if not self.kappa > 0:
            raise ConfigurationError("kappa must be positive")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def circulations(self) -> np.ndarray:
        """``Gamma_0 = -kappa`` followed by ``n`` ones."""
        return np.concatenate([[-self.kappa], np.ones(self.n)])

    @property
    def all_points(self) -> np.ndarray:
        """Positions including the central filament ``a_0 = 0``."""
        return np.concatenate([[0.0], self.points])

    def rotated(self, theta: float) -> "CentralConfig":
        return CentralConfig(self.n, self.kappa, self.points * np.exp(1j * theta))

    def to_json(self) -> dict:
        return {"n": self.n, "kappa": self.kappa,
                "points": [[float(p.real), float(p.imag)] for p in self.points]}

    @classmethod
    def from_json(cls, data: dict) -> "CentralConfig":
        pts = [complex(re, im) for re, im in data["points"]]
        return cls(int(data["n"]), float(data["kappa"]), pts)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "CentralConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def polygon_radius(n: int, kappa: float) -> float:
    excess = kappa - (n - 1) / 2
    if excess <= 0:
        raise InfeasibleError(
            f"regular polygon needs kappa > (n-1)/2; got kappa = {kappa:g} <= (n-1)/2 = {(n - 1) / 2:g}"
        )
    return excess**0.5


def polygon_config(n: int, kappa: float) -> CentralConfig:
    """Regular n-gon ``a_j = r exp(2 pi i j / n)`` with ``r^2 = kappa - (n-1)/2``.

    On the polygon the interaction sum is ``(n-1)/2 a_j / r^2``, so the force
    equation reads ``a_j (1 - (kappa - (n-1)/2) / r^2) = 0``.
    """
    if n < 2:
        raise InfeasibleError("n >= 2 required")
    r = polygon_radius(n, kappa)
    j = np.arange(1, n + 1)
    return CentralConfig(n, kappa, r * np.exp(2j * np.pi * j / n))


def nested_polygon_seed(n_per_ring: int, rings, angles=None) -> np.ndarray:
    """Z_n-symmetric seed ``a_{j+mn} = r_m exp(i(j zeta + phi_m))``, ``zeta = 2 pi / n``."""
    rings = np.asarray(rings, dtype=float).ravel()
    angles = np.zeros_like(rings) if angles is None else np.asarray(angles, dtype=float).ravel()
    if n_per_ring < 2:
        raise ConfigurationError("n_per_ring must be >= 2")
    if angles.shape != rings.shape:
        raise ConfigurationError("one angle offset per ring required")
    if np.any(rings <= 0) or len(np.unique(rings)) != len(rings):
        raise ConfigurationError("ring radii must be positive and distinct")
    zeta = 2 * np.pi / n_per_ring
    j = np.arange(n_per_ring)
    return np.concatenate([r * np.exp(1j * (j * zeta + phi)) for r, phi in zip(rings, angles)])


def _check_points(points: np.ndarray) -> None:
    if np.any(np.abs(points) == 0):
        raise DegenerateError("a point coincides with the central filament")
    diff = points[:, None] - points[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(np.abs(diff) == 0):
        raise DegenerateError("coincident filament positions")


def cc_equations(points: np.ndarray, kappa: float) -> np.ndarray:
    """Complex residuals: ``n`` force equations followed by the balance equation."""
    a = np.asarray(points, dtype=complex)
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, np.inf)
    inter = np.sum(1.0 / np.conj(diff), axis=1)
    force = a + inter - kappa / np.conj(a)
    balance = np.sum(1.0 / np.conj(a))
    return np.concatenate([force, [balance]])


def cc_residual(c: CentralConfig) -> float:
    """Max complex modulus over the force equations and the balance equation."""
    _check_points(c.points)
    return float(np.max(np.abs(cc_equations(c.points, c.kappa))))


def _antilinear(p: np.ndarray) -> np.ndarray:
    """Real 2x2 matrices of ``w -> p conj(w)`` (stacked over ``p``)."""
    a, b = p.real, p.imag
    return np.stack([np.stack([a, b], -1), np.stack([b, -a], -1)], -2)


def cc_jacobian(points: np.ndarray, kappa: float) -> np.ndarray:
    """Real Jacobian ``(2n+2) x 2n`` of :func:`cc_equations` (rows re/im interleaved).

    Uses ``d(1/conj z)[w] = -conj(w) / conj(z)^2``.
    """
    a = np.asarray(points, dtype=complex)
    n = a.size
    Jm = np.zeros((2 * n + 2, 2 * n))
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, 1.0)
    pair = -1.0 / np.conj(diff) ** 2  # d/d a_j of 1/conj(a_j - a_i)
    np.fill_diagonal(pair, 0.0)
    own = -kappa * (-1.0 / np.conj(a) ** 2)
    for j in range(n):
        diag = np.eye(2) + _antilinear(np.sum(pair[j]) + own[j])
        Jm[2 * j:2 * j + 2, 2 * j:2 * j + 2] = diag
        for i in range(n):
            if i != j:
                Jm[2 * j:2 * j + 2, 2 * i:2 * i + 2] = _antilinear(-pair[j, i])
    bal = _antilinear(-1.0 / np.conj(a) ** 2)
    for i in range(n):
        Jm[2 * n:2 * n + 2, 2 * i:2 * i + 2] = bal[i]
    return Jm


def _stack(eqs: np.ndarray) -> np.ndarray:
    return np.column_stack([eqs.real, eqs.imag]).ravel()


@dataclass
class SolveReport:
    iterations: int
    history: list


def solve_cc(initial, kappa: float, tol: float = CC_TOL, max_iter: int = MAX_ITER,
             return_report: bool = False):
    """Newton (Gauss-Newton on the overdetermined stack) for a central configuration.

    The initial data are first rotated so that ``a_1`` lies on the positive
    real axis; the constraint ``Im a_1 = 0`` is appended to the Jacobian to
    remove the rotation orbit.  The result is returned in that aligned frame.
    Steps are halved while they increase the residual.
    """
    a = np.asarray(initial, dtype=complex).ravel().copy()
    n = a.size
    if n < 2:
        raise InfeasibleError("n >= 2 required")
    _check_points(a)
    a = a * np.exp(-1j * np.angle(a[0]))

    def resid(z):
        return float(np.max(np.abs(cc_equations(z, kappa))))

    r = resid(a)
    history = [r]
    it = 0
    while r > tol:
        if it >= max_iter:
            raise DivergenceError(f"central configuration solve did not converge in {max_iter} "
                                  f"iterations (residual {r:.3e})", history)
        F = np.concatenate([_stack(cc_equations(a, kappa)), [a[0].imag]])
        Jm = cc_jacobian(a, kappa)
        phase = np.zeros((1, 2 * n))
        phase[0, 1] = 1.0
        A = np.vstack([Jm, phase])
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] < 1e-12 * sv[0]:
            raise DegenerateError("Jacobian singular beyond the rotation mode")
        step = np.linalg.lstsq(A, -F, rcond=None)[0]
        dz = step[0::2] + 1j * step[1::2]
        lam = 1.0
        while True:
            trial = a + lam * dz
            try:
                _check_points(trial)
                rt = resid(trial)
            except DegenerateError:
                rt = np.inf
            if rt < r or lam < 1e-4:
                break
            lam *= 0.5
        if not np.isfinite(rt):
            raise DivergenceError("Newton step collapsed points together", history)
        a, r = trial, rt
        it += 1
        history.append(r)
        log.debug("solve_cc iter %d residual %.3e (damping %g)", it, r, lam)
    if a[0].real < 0:
        a = -a
    cfg = CentralConfig(n, kappa, a)
    if return_report:
        return cfg, SolveReport(it, history)
    return cfg
