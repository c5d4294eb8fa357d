"""Two-component real fields on the 2*pi x 2*pi torus.

A :class:`SpectralField` stores truncated Fourier coefficients
``u_{j,k}`` (one complex pair per mode, ``|j| <= J``, ``|k| <= K``) of the
real field ``u(t, s) = sum u_{j,k} exp(i(jt + ks))``.  Coefficients live in a
dense array of shape ``(2, 2J+1, 2K+1)`` indexed as ``[component, J+j, K+k]``.

A :class:`SymmetricField` is the restriction to fields with

    x(t, s) = x(-t, s) = x(t, -s),   y(t, s) = -y(-t, s) = y(t, -s),

expanded as ``x = sum X_{jk} cos(jt) cos(ks)`` (``0 <= j <= J``) and
``y = sum Y_{jk} sin(jt) cos(ks)`` (``1 <= j <= J``), ``0 <= k <= K``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError, SymmetryError

DEFAULT_TRUNCATION = 32
DEFAULT_PADDING = 4
SYMMETRY_TOL = 1e-10
DEFAULT_SOBOLEV = 3.0

COEFF_HEADER = ["j", "k", "re_x", "im_x", "re_y", "im_y"]
GRID_HEADER = ["t", "s", "x", "y"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid2D:
    """Collocation grid plus spectral truncation.

    ``Nt``/``Ns`` must be even, at least 4, and resolve the truncation
    (``Nt >= 2J+1``, ``Ns >= 2K+1``).
    """

    Nt: int
    Ns: int
    J: int
    K: int

    def __post_init__(self):
        for name in ("Nt", "Ns"):
            n = getattr(self, name)
            if n < 4 or n % 2:
                raise ConfigurationError(f"{name}={n} must be even and >= 4")
        if self.J < 0 or self.K < 0:
            raise ConfigurationError("truncation J, K must be non-negative")
        if self.Nt < 2 * self.J + 1 or self.Ns < 2 * self.K + 1:
            raise ConfigurationError(
                f"grid {self.Nt}x{self.Ns} cannot resolve truncation J={self.J}, K={self.K}"
            )

    @classmethod
    def for_truncation(cls, J: int = DEFAULT_TRUNCATION, K: int | None = None) -> "Grid2D":
        """Smallest admissible grid for the truncation ``(J, K)``."""
        K = J if K is None else K
        return cls(max(4, 2 * J + 2), max(4, 2 * K + 2), J, K)

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.J + 1, 2 * self.K + 1)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        t = 2 * np.pi * np.arange(self.Nt) / self.Nt
        s = 2 * np.pi * np.arange(self.Ns) / self.Ns
        return t, s

    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Mode indices ``j`` (column) and ``k`` (row) broadcastable to ``shape``."""
        j = np.arange(-self.J, self.J + 1)[:, None]
        k = np.arange(-self.K, self.K + 1)[None, :]
        return j, k


@dataclass(frozen=True)
class SpectralField:
    grid: Grid2D
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2,) + self.grid.shape:
            raise ConfigurationError(
                f"coefficient array has shape {c.shape}, expected {(2,) + self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "SpectralField":
        return cls(grid, np.zeros((2,) + grid.shape, dtype=complex))

    def hermitian_defect(self) -> float:
        c = self.coeffs
        return float(np.max(np.abs(c - np.conj(c[:, ::-1, ::-1])), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs), initial=0.0)))
        return self.hermitian_defect() <= tol * scale

    def coefficient(self, j: int, k: int) -> np.ndarray:
        return self.coeffs[:, self.grid.J + j, self.grid.K + k]

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: Grid2D, b: Grid2D) -> None:
    if (a.J, a.K) != (b.J, b.K):
        raise ConfigurationError(f"truncation mismatch: {(a.J, a.K)} vs {(b.J, b.K)}")


def _scatter(coeffs: np.ndarray, J: int, K: int, Nt: int, Ns: int) -> np.ndarray:
    """Place truncated coefficients into an FFT-ordered ``(.., Nt, Ns)`` array."""
    out = np.zeros(coeffs.shape[:-2] + (Nt, Ns), dtype=complex)
    jj = np.arange(-J, J + 1) % Nt
    kk = np.arange(-K, K + 1) % Ns
    out[..., jj[:, None], kk[None, :]] = coeffs
    return out


def _gather(full: np.ndarray, J: int, K: int) -> np.ndarray:
    Nt, Ns = full.shape[-2:]
    jj = np.arange(-J, J + 1) % Nt
    kk = np.arange(-K, K + 1) % Ns
    return full[..., jj[:, None], kk[None, :]]


def to_grid(f: SpectralField, Nt: int | None = None, Ns: int | None = None) -> np.ndarray:
    """Values of the real field at ``t_m = 2 pi m / Nt``, ``s_n = 2 pi n / Ns``.

    Returns an array of shape ``(2, Nt, Ns)``; defaults to the field's own grid.
    """
    g = f.grid
    Nt = g.Nt if Nt is None else Nt
    Ns = g.Ns if Ns is None else Ns
    if Nt < 2 * g.J + 1 or Ns < 2 * g.K + 1:
        raise ConfigurationError(f"grid {Nt}x{Ns} too small for truncation J={g.J}, K={g.K}")
    full = _scatter(f.coeffs, g.J, g.K, Nt, Ns)
    return np.fft.ifft2(full, axes=(-2, -1)).real * (Nt * Ns)


def to_coeffs(values: np.ndarray, grid: Grid2D) -> SpectralField:
    """Inverse of :func:`to_grid`: truncated coefficients of sampled values."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 3 or values.shape[0] != 2:
        raise ConfigurationError(f"expected values of shape (2, Nt, Ns), got {values.shape}")
    Nt, Ns = values.shape[1:]
    if Nt < 2 * grid.J + 1 or Ns < 2 * grid.K + 1:
        raise ConfigurationError(f"samples {Nt}x{Ns} cannot resolve J={grid.J}, K={grid.K}")
    full = np.fft.fft2(values, axes=(-2, -1)) / (Nt * Ns)
    return SpectralField(grid, _gather(full, grid.J, grid.K))


def sobolev_norm(f: SpectralField, s: float = DEFAULT_SOBOLEV) -> float:
    """``(sum |u_{jk}|^2 (j^2 + k^2 + 1)^s)^(1/2)``."""
    if s < 0:
        raise ConfigurationError("Sobolev index must be >= 0")
    j, k = f.grid.modes()
    w = (j**2 + k**2 + 1.0) ** s
    return float(np.sqrt(np.sum(np.sum(np.abs(f.coeffs) ** 2, axis=0) * w)))


def dealiased_pointwise(
    f: SpectralField,
    fn: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
    padding: int = DEFAULT_PADDING,
) -> SpectralField:
    """Apply a pointwise map ``(x, y) -> (gx, gy)`` on a refined grid.

    The field is sampled on a grid ``padding`` times finer in each direction,
    mapped, transformed back and truncated to the original ``(J, K)``.
    Polynomial maps of degree ``<= padding`` come back alias-free.
    """
    if padding < 1:
        raise ConfigurationError("padding must be >= 1")
    g = f.grid
    Pt, Ps = padding * g.Nt, padding * g.Ns
    x, y = to_grid(f, Pt, Ps)
    gx, gy = fn(x, y)
    return to_coeffs(np.stack([np.broadcast_to(gx, x.shape), np.broadcast_to(gy, y.shape)]), g)


# --------------------------------------------------------------------------
# symmetric subspace


def _nu(n: int) -> np.ndarray:
    """1 for index 0, 2 otherwise: cosine/exponential amplitude ratio."""
    v = np.full(n + 1, 2.0)
    v[0] = 1.0
    return v


@dataclass(frozen=True)
class SymmetricField:
    """Coefficients of the cos/sin expansion; ``X`` is ``(J+1, K+1)``, ``Y`` is ``(J, K+1)``.

    ``Y[j-1, k]`` multiplies ``sin(jt) cos(ks)``; there is no ``j = 0`` row.
    """

    grid: Grid2D
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = self.grid
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.shape != (g.J + 1, g.K + 1) or Y.shape != (g.J, g.K + 1):
            raise ConfigurationError(
                f"symmetric field shapes {X.shape}, {Y.shape} do not match J={g.J}, K={g.K}"
            )
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "SymmetricField":
        return cls(grid, np.zeros((grid.J + 1, grid.K + 1)), np.zeros((grid.J, grid.K + 1)))

    @property
    def size(self) -> int:
        return self.X.size + self.Y.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.X.ravel(), self.Y.ravel()])

    @classmethod
    def from_vector(cls, grid: Grid2D, vec: np.ndarray) -> "SymmetricField":
        n = (grid.J + 1) * (grid.K + 1)
        vec = np.asarray(vec, dtype=float)
        if vec.size != n + grid.J * (grid.K + 1):
            raise ConfigurationError(f"vector of length {vec.size} does not match grid")
        return cls(grid, vec[:n].reshape(grid.J + 1, grid.K + 1),
                   vec[n:].reshape(grid.J, grid.K + 1))

    def Y_full(self) -> np.ndarray:
        """``Y`` with an explicit zero ``j = 0`` row, shape ``(J+1, K+1)``."""
        return np.vstack([np.zeros((1, self.grid.K + 1)), self.Y])

    def __add__(self, other: "SymmetricField") -> "SymmetricField":
        _check_same_grid(self.grid, other.grid)
        return SymmetricField(self.grid, self.X + other.X, self.Y + other.Y)

    def __sub__(self, other: "SymmetricField") -> "SymmetricField":
        _check_same_grid(self.grid, other.grid)
        return SymmetricField(self.grid, self.X - other.X, self.Y - other.Y)

    def __mul__(self, scalar: float) -> "SymmetricField":
        return SymmetricField(self.grid, self.X * scalar, self.Y * scalar)

    __rmul__ = __mul__


def mode_weights(grid: Grid2D, s: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Per-coefficient weights so that ``sum w X^2 + w Y^2 = ||embed(v)||_{H^s}^2``.

    ``embed`` spreads a coefficient over 1, 2 or 4 Hermitian sites, so the
    L2 weight is 1 for (0,0), 1/2 on the axes and 1/4 in the interior.
    """
    nj, nk = _nu(grid.J), _nu(grid.K)
    j = np.arange(grid.J + 1)[:, None]
    k = np.arange(grid.K + 1)[None, :]
    w = (j**2 + k**2 + 1.0) ** s / (nj[:, None] * nk[None, :])
    return w, w[1:]


def sym_inner(a: SymmetricField, b: SymmetricField, s: float = 0.0) -> float:
    wx, wy = mode_weights(a.grid, s)
    return float(np.sum(wx * a.X * b.X) + np.sum(wy * a.Y * b.Y))


def sym_norm(v: SymmetricField, s: float = 0.0) -> float:
    return float(np.sqrt(max(sym_inner(v, v, s), 0.0)))


def embed_coeffs(X: np.ndarray, Yfull: np.ndarray, J: int, K: int) -> np.ndarray:
    """Hermitian coefficient array ``(2, 2J+1, 2K+1)`` of a symmetric field.

    Values are assigned, not accumulated, so every site is an exact power-of-two
    fraction of its source coefficient.
    """
    nj, nk = _nu(J), _nu(K)
    xs = X / (nj[:, None] * nk[None, :])
    ys = Yfull / (2.0 * nk[None, :])
    out = np.zeros((2, 2 * J + 1, 2 * K + 1), dtype=complex)
    j = np.arange(J + 1)[:, None]
    k = np.arange(K + 1)[None, :]
    for sj in (1, -1):
        for sk in (1, -1):
            out[0, J + sj * j, K + sk * k] = xs
            out[1, J + sj * j, K + sk * k] = -1j * sj * ys
    return out


def restrict_coeffs(c: np.ndarray, J: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projection onto the symmetric basis; returns ``(X, Yfull)``."""
    nj, nk = _nu(J), _nu(K)
    jp, jm = slice(J, 2 * J + 1), slice(J, None, -1)
    kp, km = slice(K, 2 * K + 1), slice(K, None, -1)
    x, y = c[0], c[1]
    X = ((x[jp, kp] + x[jm, km]) + (x[jp, km] + x[jm, kp])).real
    X = X * (nj[:, None] * nk[None, :]) / 4.0
    Y = -((y[jp, kp] + y[jp, km]) - (y[jm, kp] + y[jm, km])).imag
    Y = Y * nk[None, :] / 2.0
    Y[0] = 0.0
    return X, Y


def embed(v: SymmetricField) -> SpectralField:
    g = v.grid
    return SpectralField(g, embed_coeffs(v.X, v.Y_full(), g.J, g.K))


def symmetry_defect(f: SpectralField) -> float:
    """L2 distance from ``f`` to the symmetric subspace."""
    g = f.grid
    X, Y = restrict_coeffs(f.coeffs, g.J, g.K)
    back = embed_coeffs(X, Y, g.J, g.K)
    return float(np.sqrt(np.sum(np.abs(f.coeffs - back) ** 2)))


def restrict(f: SpectralField, tol: float | None = SYMMETRY_TOL) -> SymmetricField:
    """Project onto the symmetric subspace.

    Raises :class:`SymmetryError` if the defect exceeds ``tol`` relative to
    ``||f||``; pass ``tol=None`` to skip the check.
    """
    g = f.grid
    X, Y = restrict_coeffs(f.coeffs, g.J, g.K)
    if tol is not None:
        defect = symmetry_defect(f)
        if defect > tol * f.l2_norm():
            raise SymmetryError(
                f"field is not symmetric: defect {defect:.3e} vs norm {f.l2_norm():.3e}", defect
            )
    return SymmetricField(g, X, Y[1:])


def evaluate_symmetric(v: SymmetricField, t, s) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``(x, y)`` of a symmetric field at arbitrary points (broadcast)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    j = np.arange(v.grid.J + 1)
    k = np.arange(v.grid.K + 1)
    ct = np.cos(np.multiply.outer(t, j))
    st = np.sin(np.multiply.outer(t, j))
    cs = np.cos(np.multiply.outer(s, k))
    x = np.einsum("...j,jk,...k->...", ct, v.X, cs)
    y = np.einsum("...j,jk,...k->...", st, v.Y_full(), cs)
    return x, y


# --------------------------------------------------------------------------
# CSV serialisation


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_coeffs_csv(f: SpectralField, path, comments=()) -> None:
    """Write all coefficients; ``comments`` become leading ``#`` lines."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh)
        w.writerow(COEFF_HEADER)
        for j in range(-g.J, g.J + 1):
            for k in range(-g.K, g.K + 1):
                cx, cy = f.coefficient(j, k)
                w.writerow([j, k, _fmt(cx.real), _fmt(cx.imag), _fmt(cy.real), _fmt(cy.imag)])


def read_coeffs_csv(path, grid: Grid2D | None = None) -> SpectralField:
    """Read a coefficient CSV; the truncation is inferred unless ``grid`` is given."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header != COEFF_HEADER:
            raise ConfigurationError(f"{path}: unexpected header {header}")
        for r in reader:
            if r:
                rows.append((int(r[0]), int(r[1]), complex(float(r[2]), float(r[3])),
                             complex(float(r[4]), float(r[5]))))
    if grid is None:
        J = max(abs(r[0]) for r in rows)
        K = max(abs(r[1]) for r in rows)
        grid = Grid2D.for_truncation(J, K)
    c = np.zeros((2,) + grid.shape, dtype=complex)
    for j, k, cx, cy in rows:
        if abs(j) > grid.J or abs(k) > grid.K:
            raise ConfigurationError(f"{path}: mode ({j},{k}) outside truncation")
        c[0, grid.J + j, grid.K + k] = cx
        c[1, grid.J + j, grid.K + k] = cy
    return SpectralField(grid, c)


def write_grid_csv(f: SpectralField, path) -> None:
    values = to_grid(f)
    t, s = f.grid.points()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GRID_HEADER)
        for m, tm in enumerate(t):
            for n, sn in enumerate(s):
                w.writerow([_fmt(tm), _fmt(sn), _fmt(values[0, m, n]), _fmt(values[1, m, n])])


def read_grid_csv(path, grid: Grid2D) -> np.ndarray:
    """Read ``t,s,x,y`` samples back into a ``(2, Nt, Ns)`` array."""
    values = np.full((2, grid.Nt, grid.Ns), np.nan)
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header != GRID_HEADER:
            raise ConfigurationError(f"{path}: unexpected header {header}")
        for r in reader:
            if not r:
                continue
            m = int(round(float(r[0]) * grid.Nt / (2 * np.pi)))
            n = int(round(float(r[1]) * grid.Ns / (2 * np.pi)))
            values[:, m, n] = float(r[2]), float(r[3])
    if np.isnan(values).any():
        raise ConfigurationError(f"{path}: incomplete grid samples")
    return values


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
