"""Fourier multipliers of the linearised operator and its zero modes.

On the mode ``exp(i(jt + ks))`` the operator acts by the Hermitian matrix

    M_{j,k} = [[k^2 + 2 omega,  i j/q],
               [-i j/q,         k^2  ]]

with eigenvalues ``k^2 + omega + l sqrt((j/q)^2 + omega^2)``, ``l = +-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, PreconditionError
from .field import Grid2D, SymmetricField, sym_norm

ZERO_TOL = 1e-9
DEFAULT_SCAN = (400, 80)
DEFAULT_EPSILON = 0.02


@dataclass(frozen=True)
class OperatorParams:
    q: int
    omega: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if int(self.q) != self.q or self.q == 0:
            raise PreconditionError("q must be a nonzero integer")

    def check_gap_hypothesis(self) -> None:
        lo, hi = 2 * self.epsilon, 1 / abs(self.q) - 2 * self.epsilon
        if not (self.omega < 0 and lo < abs(self.omega) < hi):
            raise PreconditionError(
                f"gap certification needs omega < 0 and {lo:g} < |omega| < {hi:g}; "
                f"got omega={self.omega:g}"
            )


@dataclass(frozen=True)
class ModeEigenpair:
    j: int
    k: int
    l: int
    lam: float
    evec: np.ndarray = field(repr=False)


def multiplier_matrix(j: int, k: int, p: OperatorParams) -> np.ndarray:
    a = j / p.q
    return np.array([[k * k + 2 * p.omega, 1j * a], [-1j * a, k * k]], dtype=complex)


def multiplier_stack(j, k, q, omega) -> np.ndarray:
    """``M_{j,k}`` broadcast over arrays ``j``, ``k``; shape ``(..., 2, 2)``."""
    j, k = np.broadcast_arrays(np.asarray(j, dtype=float), np.asarray(k, dtype=float))
    a = j / q
    M = np.empty(j.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = k * k + 2 * omega
    M[..., 0, 1] = 1j * a
    M[..., 1, 0] = -1j * a
    M[..., 1, 1] = k * k
    return M


def eigenvalue(j, k, l, q, omega):
    """Closed-form ``lambda_{j,k,l}``; broadcasts."""
    j = np.asarray(j, dtype=float)
    return k * k + omega + l * np.sqrt((j / q) ** 2 + omega**2)


def eigenpair(j: int, k: int, l: int, p: OperatorParams) -> ModeEigenpair:
    """Closed-form eigenvalue with eigenvector ``(-omega - l r, i j/q)``, ``r = sqrt((j/q)^2 + omega^2)``.

    When that vector is numerically null (``j = 0``) the eigenvector comes from
    a direct decomposition of ``M_{j,k}`` instead.
    """
    if l not in (1, -1):
        raise PreconditionError("l must be +1 or -1")
    lam = float(eigenvalue(j, k, l, p.q, p.omega))
    r = np.sqrt((j / p.q) ** 2 + p.omega**2)
    e = np.array([-p.omega - l * r, 1j * j / p.q], dtype=complex)
    M = multiplier_matrix(j, k, p)
    scale = max(1.0, np.linalg.norm(M, 2))
    if np.linalg.norm(e) <= 1e-12 * scale:
        w, V = np.linalg.eigh(M)
        e = V[:, np.argmin(np.abs(w - lam))]
    return ModeEigenpair(j, k, l, lam, e)


def min_modulus_eigenvalues(q: int, omega: float, scan_J: int, scan_K: int):
    """``min |eig(M_{j,k})|`` over ``|j| <= scan_J``, ``|k| <= scan_K`` by direct decomposition.

    Returns ``(j, k, values)`` with ``values`` shaped ``(2 scan_J + 1, 2 scan_K + 1)``.
    """
    j = np.arange(-scan_J, scan_J + 1)[:, None]
    k = np.arange(-scan_K, scan_K + 1)[None, :]
    w = np.linalg.eigvalsh(multiplier_stack(j, k, q, omega))
    return j, k, np.min(np.abs(w), axis=-1)


@dataclass(frozen=True)
class BifurcationPoint:
    q: int
    k0: int
    j0: int
    omega0: float

    def kernel_vector(self) -> tuple[float, float]:
        """Unnormalised ``(X, Y)`` of the kernel mode at ``(j0, k0)``: ``(k0^2, -j0/q)``.

        The sine component carries a minus sign: this is the null vector of
        the real 2x2 block ``[[k^2 + 2w, j/q], [j/q, k^2]]`` acting on
        ``(cos jt, sin jt)`` amplitudes.
        """
        return float(self.k0**2), -self.j0 / self.q

    def kernel_fn(self, grid: Grid2D) -> SymmetricField:
        """Unit-L2 kernel function of ``L(omega0)`` in the symmetric subspace."""
        if self.j0 > grid.J or self.k0 > grid.K:
            raise PreconditionError(
                f"truncation J={grid.J}, K={grid.K} does not contain mode ({self.j0},{self.k0})"
            )
        v = SymmetricField.zeros(grid)
        X, Y = v.X.copy(), v.Y.copy()
        X[self.j0, self.k0], Y[self.j0 - 1, self.k0] = self.kernel_vector()
        v = SymmetricField(grid, X, Y)
        return v * (1.0 / sym_norm(v))

    @property
    def amplitude_ratio(self) -> float:
        """``Y/X`` of the leading-order solution, ``-(1 - 1/(q k0^2))``."""
        return -(1.0 - 1.0 / (self.q * self.k0**2))


def bifurcation_frequency(q: int, k0: int) -> BifurcationPoint:
    """``omega0 = -(1/q)(1 - 1/(2 q k0^2))`` and ``j0 = q k0^2 - 1``."""
    if q < 1 or k0 < 1:
        raise PreconditionError("q >= 1 and k0 >= 1 required")
    j0 = q * k0 * k0 - 1
    if j0 < 1:
        raise DegenerateError(f"j0 = q k0^2 - 1 = {j0}: time-independent kernel mode is not supported")
    omega0 = -(1.0 / q) * (1.0 - 1.0 / (2.0 * q * k0 * k0))
    bif = BifurcationPoint(q, k0, j0, omega0)
    lam = eigenvalue(j0, k0, -1, q, omega0)
    if abs(lam) > 1e-12 or not -1.0 / q < omega0 < 0:
        raise ArithmeticError(f"bifurcation check failed: lambda={lam:.3e}")
    return bif


def resonant_set(p: OperatorParams, scan_J: int = DEFAULT_SCAN[0], scan_K: int = DEFAULT_SCAN[1],
                 tol: float = ZERO_TOL) -> list[tuple[int, int]]:
    """All ``(j, k)`` in the scan box where ``M_{j,k}`` has an eigenvalue with ``|lambda| <= tol``."""
    j, k, m = min_modulus_eigenvalues(p.q, p.omega, scan_J, scan_K)
    jj, kk = np.nonzero(m <= tol)
    return sorted((int(j[a, 0]), int(k[0, b])) for a, b in zip(jj, kk))


@dataclass(frozen=True)
class GapCertificate:
    gap: float          # certified lower bound over the whole lattice minus excluded sites
    scan_gap: float     # min over the scanned box minus excluded sites
    tail_bound: float   # analytic lower bound outside the box
    worst_mode: tuple[int, int]
    scan: tuple[int, int]


def tail_bound(q: int, omega: float, scan_J: int, scan_K: int) -> float:
    """Lower bound of ``min |eig(M_{j,k})|`` for all modes outside the scan box.

    With ``a = |j|/q`` and ``d = k^2 - a`` (a multiple of ``1/q``),
    ``lambda_- = d - |omega| - delta`` where ``0 < delta <= omega^2/(2a)``.  Hence for
    ``|j| > scan_J``: ``|lambda_-| >= dist(|omega|, Z/q) - q omega^2 / (2 scan_J)``.
    For ``|j| <= scan_J < |k|``: ``lambda_- >= (scan_K+1)^2 - scan_J/q - 2|omega|``.
    ``lambda_+ >= k^2`` when ``k != 0`` and grows with ``|j|`` when ``k = 0``.
    """
    w = abs(omega)
    frac = (w * q) % 1.0
    dist = min(frac, 1.0 - frac) / q
    far_j = dist - q * w * w / (2.0 * (scan_J + 1))
    far_k = (scan_K + 1) ** 2 - scan_J / q - 2 * w
    plus_k0 = np.sqrt(((scan_J + 1) / q) ** 2 + w * w) - w
    return float(min(far_j, far_k, plus_k0, 1.0))


def certify_gap(p: OperatorParams, exclude=None, scan_J: int = DEFAULT_SCAN[0],
                scan_K: int = DEFAULT_SCAN[1], check_hypothesis: bool = True) -> GapCertificate:
    """Minimum ``|lambda|`` off the excluded (resonant) sites, valid for the full lattice.

    The tail bound holds for any ``omega``; ``check_hypothesis=False`` skips the
    ``2 eps < |omega| < 1/q - 2 eps`` window used for the uniform gap statement.
    """
    if check_hypothesis:
        p.check_gap_hypothesis()
    if _box_too_small(p.q, scan_J, scan_K):
        raise PreconditionError("scan box too small for the tail bound: need (scan_K+1)^2 > scan_J/q + 2")
    j, k, m = min_modulus_eigenvalues(p.q, p.omega, scan_J, scan_K)
    if exclude is None:
        # same test as resonant_set, without repeating the scan
        m[m <= ZERO_TOL] = np.inf
    else:
        for a, b in exclude:
            if abs(a) <= scan_J and abs(b) <= scan_K:
                m[a + scan_J, b + scan_K] = np.inf
    idx = np.unravel_index(np.argmin(m), m.shape)
    scan_gap = float(m[idx])
    tail = tail_bound(p.q, p.omega, scan_J, scan_K)
    worst = (int(j[idx[0], 0]), int(k[0, idx[1]]))
    return GapCertificate(min(scan_gap, tail), scan_gap, tail, worst, (scan_J, scan_K))


def _box_too_small(q: int, scan_J: int, scan_K: int) -> bool:
    return (scan_K + 1) ** 2 <= scan_J / abs(q) + 2
