"""Residual ``F(u, omega) = L(omega) u + g(u)`` of the standing-wave equation.

In real coordinates ``u = (x, y)``

    L(omega) u = ((1/q) y_t - x_ss + 2 omega x,  -(1/q) x_t - y_ss)

and ``g = (Re g_c, Im g_c)`` with ``g_c = -omega z^2 / (1 + z)``, ``z = x - i y``.
That sign is the one produced by substituting ``w = a e^{i omega t}(1 + u(t/q, s))``
into ``w_t = i(w_ss - w/|w|^2)`` with ``omega = -a^{-2}``.

On a symmetric field the linear part is block diagonal: each mode ``(j, k)``
sees the real matrix ``[[k^2 + 2 omega, j/q], [j/q, k^2]]`` acting on
``(X_{jk}, Y_{jk})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .field import (
    DEFAULT_PADDING,
    Grid2D,
    SpectralField,
    SymmetricField,
    _gather,
    _nu,
    _scatter,
    dealiased_pointwise,
    embed,
    embed_coeffs,
    restrict_coeffs,
    to_grid,
)
from .spectrum import multiplier_stack

DOMAIN_MARGIN = 0.05


def g_complex(z: np.ndarray, omega: float) -> np.ndarray:
    """``-omega z^2 / (1 + z)`` with ``z = conj(u)``."""
    return -omega * z * z / (1.0 + z)


def dg_complex(z: np.ndarray, omega: float) -> np.ndarray:
    """Derivative of :func:`g_complex` with respect to ``z``."""
    return -omega * z * (2.0 + z) / (1.0 + z) ** 2


def _check_domain(x: np.ndarray, y: np.ndarray) -> None:
    m = float(np.sqrt(np.max(x * x + y * y)))
    if m >= 1.0 - DOMAIN_MARGIN:
        raise DomainError(
            f"max |u| = {m:.4f} reaches the singular disk (limit {1 - DOMAIN_MARGIN}); "
            "nonlinearity is only analytic for |(x, y)| < 1"
        )


def _g_real(x, y, omega):
    _check_domain(x, y)
    gc = g_complex(x - 1j * y, omega)
    return gc.real, gc.imag


def eval_g(u: SpectralField, omega: float, padding: int = DEFAULT_PADDING) -> SpectralField:
    """Nonlinearity evaluated on the padded grid and truncated back."""
    return dealiased_pointwise(u, lambda x, y: _g_real(x, y, omega), padding)


def apply_linear_full(u: SpectralField, q: int, omega: float) -> SpectralField:
    """``L(omega) u`` by the multiplier matrices ``M_{j,k}`` on every coefficient pair."""
    j, k = u.grid.modes()
    M = multiplier_stack(j, k, q, omega)
    out = np.einsum("jkab,bjk->ajk", M, u.coeffs)
    return SpectralField(u.grid, out)


def full_residual(v, omega: float, ws: "ResidualWorkspace") -> SpectralField:
    """Residual in the full (non-symmetric) truncated space."""
    u = embed(v) if isinstance(v, SymmetricField) else v
    return apply_linear_full(u, ws.q, omega) + eval_g(u, omega, ws.padding)


@dataclass
class ResidualWorkspace:
    """Precomputed index tables for residual/Jacobian evaluation at fixed ``(grid, q, padding)``."""

    grid: Grid2D
    q: int
    padding: int = DEFAULT_PADDING
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.padding < 2:
            raise ConfigurationError("padding must be >= 2")
        g = self.grid
        self.Pt = self.padding * g.Nt
        self.Ps = self.padding * g.Ns
        self.j = np.arange(g.J + 1)[:, None].astype(float)
        self.k = np.arange(g.K + 1)[None, :].astype(float)
        self.nx = (g.J + 1) * (g.K + 1)
        self.size = self.nx + g.J * (g.K + 1)

    # -- transforms ---------------------------------------------------------

    def padded_values(self, v: SymmetricField) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        c = embed_coeffs(v.X, v.Y_full(), g.J, g.K)
        full = _scatter(c, g.J, g.K, self.Pt, self.Ps)
        x, y = np.fft.ifft2(full, axes=(-2, -1)).real * (self.Pt * self.Ps)
        return x, y

    def project(self, gx: np.ndarray, gy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Padded grid values -> symmetric coefficients ``(X, Y)`` (Y without j=0 row)."""
        g = self.grid
        full = np.fft.fft2(np.stack([gx, gy]), axes=(-2, -1)) / (self.Pt * self.Ps)
        X, Y = restrict_coeffs(_gather(full, g.J, g.K), g.J, g.K)
        return X, Y[1:]

    # -- pieces -------------------------------------------------------------

    def linear(self, v: SymmetricField, omega: float) -> SymmetricField:
        a = self.j / self.q
        k2 = self.k**2
        Y = v.Y_full()
        X_out = (k2 + 2 * omega) * v.X + a * Y
        Y_out = a * v.X + k2 * Y
        return SymmetricField(self.grid, X_out, Y_out[1:])

    def g(self, v: SymmetricField, omega: float) -> SymmetricField:
        x, y = self.padded_values(v)
        gx, gy = _g_real(x, y, omega)
        return SymmetricField(self.grid, *self.project(gx, gy))

    def pointwise_derivative(self, v: SymmetricField, omega: float):
        """``(alpha, beta)`` with ``Dg[dx, dy] = (alpha dx + beta dy, beta dx - alpha dy)``."""
        x, y = self.padded_values(v)
        _check_domain(x, y)
        d = dg_complex(x - 1j * y, omega)
        return d.real, d.imag


def residual(v: SymmetricField, omega: float, ws: ResidualWorkspace) -> SymmetricField:
    """``L(omega) v + g(v)`` in the symmetric basis."""
    return ws.linear(v, omega) + ws.g(v, omega)


def d_omega(v: SymmetricField, omega: float, ws: ResidualWorkspace) -> SymmetricField:
    """``dF/domega = (I + R) v + g(v)/omega``; ``g`` is linear in ``omega``."""
    gx = ws.g(v, 1.0)
    return SymmetricField(ws.grid, 2 * v.X + gx.X, gx.Y)


def jacobian_apply(v: SymmetricField, omega: float, dv: SymmetricField,
                   ws: ResidualWorkspace) -> SymmetricField:
    """``L(omega) dv + Dg(v)[dv]`` evaluated pointwise on the padded grid."""
    alpha, beta = ws.pointwise_derivative(v, omega)
    dx, dy = ws.padded_values(dv)
    nl = SymmetricField(ws.grid, *ws.project(alpha * dx + beta * dy, beta * dx - alpha * dy))
    return ws.linear(dv, omega) + nl


# --------------------------------------------------------------------------
# dense assembly


def _linear_blocks(ws: ResidualWorkspace, omega: float):
    g = ws.grid
    a = np.broadcast_to(ws.j / ws.q, (g.J + 1, g.K + 1)).ravel()
    k2 = np.broadcast_to(ws.k**2, (g.J + 1, g.K + 1)).ravel()
    nx = ws.nx
    L = np.zeros((ws.size, ws.size))
    ix = np.arange(nx)
    L[ix, ix] = k2 + 2 * omega
    iy = np.arange(g.K + 1, nx)          # X indices with j >= 1
    ry = nx + np.arange(ws.size - nx)    # matching Y indices
    L[iy, ry] = a[g.K + 1:]
    L[ry, iy] = a[g.K + 1:]
    L[ry, ry] = k2[g.K + 1:]
    return L


def _s_combined(mhat: np.ndarray, ws: ResidualWorkspace) -> np.ndarray:
    """Sum over the four s-sign combinations: ``(Pt, K+1, K+1)``."""
    K = ws.grid.K
    k = np.arange(K + 1)
    nk = _nu(K)
    S = np.zeros((ws.Pt, K + 1, K + 1), dtype=complex)
    for so in (1, -1):
        for si in (1, -1):
            idx = (so * k[:, None] - si * k[None, :]) % ws.Ps
            S += mhat[:, idx]
    return S * (nk[:, None] / 4.0)[None]


def _mult_block(S: np.ndarray, ws: ResidualWorkspace, out_type: str, in_type: str) -> np.ndarray:
    """Galerkin matrix of multiplication by a scalar field between basis types.

    Input basis ``cos(j't)`` unfolds to weights ``1/2, 1/2`` on ``+-j'``; ``sin(j't)`` to
    ``-i/2, +i/2``.  Output projection onto ``cos(jt)`` uses ``nu_j/2`` on both signs,
    onto ``sin(jt)`` uses ``+i, -i``.
    """
    J = ws.grid.J
    j = np.arange(J + 1)
    nj = _nu(J)
    B = np.zeros((J + 1, J + 1) + S.shape[1:], dtype=complex)
    for so in (1, -1):
        wo = (nj / 2.0) if out_type == "X" else np.full(J + 1, 1j * so)
        for si in (1, -1):
            wi = 0.5 if in_type == "X" else -0.5j * si
            idx = (so * j[:, None] - si * j[None, :]) % ws.Pt
            B += (wo[:, None] * wi)[:, :, None, None] * S[idx]
    # (j, j', k, k') -> (j, k, j', k')
    B = B.real.transpose(0, 2, 1, 3).reshape((J + 1) * S.shape[1], (J + 1) * S.shape[2])
    return B


def assemble_dense(v: SymmetricField, omega: float, ws: ResidualWorkspace,
                   amplitude_mode: tuple[int, int] | None = None,
                   amplitude: float | None = None,
                   tangent: SymmetricField | None = None) -> np.ndarray:
    """Dense Jacobian of :func:`residual` in the symmetric basis.

    With ``amplitude_mode=(j0, k0)`` the matrix is bordered by the row selecting
    ``X_{j0,k0}`` and the column ``dF/domega / amplitude``.  Dividing by the
    amplitude keeps the bordered matrix regular down to ``b -> 0``; at
    ``amplitude == 0`` the column is its limit ``(I + R) tangent`` with
    ``tangent`` the unit-amplitude kernel direction.
    """
    g = ws.grid
    A = _linear_blocks(ws, omega)
    alpha, beta = ws.pointwise_derivative(v, omega)
    norm = ws.Pt * ws.Ps
    Sa = _s_combined(np.fft.fft2(alpha) / norm, ws)
    Sb = _s_combined(np.fft.fft2(beta) / norm, ws)
    nx = ws.nx
    ny = g.K + 1  # rows of the j=0 slab removed from Y-type blocks
    A[:nx, :nx] += _mult_block(Sa, ws, "X", "X")
    A[:nx, nx:] += _mult_block(Sb, ws, "X", "Y")[:, ny:]
    A[nx:, :nx] += _mult_block(Sb, ws, "Y", "X")[ny:, :]
    A[nx:, nx:] -= _mult_block(Sa, ws, "Y", "Y")[ny:, ny:]
    if amplitude_mode is None:
        return A
    j0, k0 = amplitude_mode
    if amplitude is None:
        raise ConfigurationError("bordered assembly needs the amplitude")
    if amplitude > 0:
        col = d_omega(v, omega, ws).to_vector() / amplitude
    else:
        if tangent is None:
            raise ConfigurationError("amplitude 0 needs the kernel tangent")
        col = np.concatenate([2 * tangent.X.ravel(), np.zeros(tangent.Y.size)])
    n = ws.size
    Bm = np.zeros((n + 1, n + 1))
    Bm[:n, :n] = A
    Bm[:n, n] = col
    Bm[n, j0 * (g.K + 1) + k0] = 1.0
    return Bm
