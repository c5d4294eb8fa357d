"""Amplitude continuation of the bifurcating standing-wave branch.

The branch is parameterised by ``b = X_{j0,k0}``.  Each point solves the
bordered system ``{F(v, omega) = 0, X_{j0,k0}(v) = b}`` by damped Newton with
a dense Jacobian.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ContinuationError, DivergenceError, DomainError
from .field import Grid2D, SymmetricField, embed, sobolev_norm, sym_inner, sym_norm
from .residual import ResidualWorkspace, assemble_dense, full_residual, residual
from .spectrum import BifurcationPoint

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContinuationSettings:
    db: float = 5e-4
    b_max: float = 2e-2
    tol: float = 1e-11
    max_iter: int = 25
    db_min: float = 1e-6
    J: int = 32
    K: int = 32
    padding: int = 4

    def __post_init__(self):
        if not self.db > 0:
            raise ValueError("db must be positive")
        if self.b_max < 0:
            raise ValueError("b_max must be >= 0")

    def grid(self) -> Grid2D:
        return Grid2D.for_truncation(self.J, self.K)


@dataclass(frozen=True)
class BranchPoint:
    b: float
    omega: float
    v: SymmetricField = field(repr=False)
    residual_norm: float
    newton_iters: int


@dataclass
class Branch:
    bif: BifurcationPoint
    points: list
    settings: ContinuationSettings

    @property
    def b(self) -> np.ndarray:
        return np.array([p.b for p in self.points])

    @property
    def omega(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])


def predictor(bif: BifurcationPoint, b: float, grid: Grid2D) -> tuple[SymmetricField, float]:
    """Leading-order solution ``b (cos j0t, -(1 - 1/(q k0^2)) sin j0t) cos k0s`` at ``omega0``."""
    v = SymmetricField.zeros(grid)
    if bif.j0 > grid.J or bif.k0 > grid.K:
        raise ValueError(f"grid truncation too small for mode ({bif.j0},{bif.k0})")
    X, Y = v.X.copy(), v.Y.copy()
    X[bif.j0, bif.k0] = b
    Y[bif.j0 - 1, bif.k0] = b * bif.amplitude_ratio
    return SymmetricField(grid, X, Y), bif.omega0


def _norm(F: SymmetricField) -> float:
    return sym_norm(F)


def newton_correct(init: tuple[SymmetricField, float], b: float, ws: ResidualWorkspace,
                   bif: BifurcationPoint, tol: float = 1e-11, max_iter: int = 25) -> BranchPoint:
    """Solve the bordered system at amplitude ``b`` starting from ``init = (v, omega)``."""
    v, omega = init
    g = ws.grid
    j0, k0 = bif.j0, bif.k0
    if b == 0:
        # the trivial branch point is exact; Newton would only see the singular linearisation
        return BranchPoint(0.0, bif.omega0, SymmetricField.zeros(g), 0.0, 0)

    def total(v, omega):
        F = residual(v, omega, ws)
        return F, float(np.hypot(_norm(F), v.X[j0, k0] - b))

    F, r = total(v, omega)
    history = [r]
    it = 0
    while r > tol:
        if it >= max_iter:
            raise DivergenceError(f"Newton did not converge at b={b:g} (residual {r:.3e})", history)
        A = assemble_dense(v, omega, ws, (j0, k0), b)
        rhs = np.concatenate([F.to_vector(), [v.X[j0, k0] - b]])
        step = scipy.linalg.solve(A, -rhs, check_finite=False)
        dv = SymmetricField.from_vector(g, step[:-1])
        domega = step[-1] / b
        lam = 1.0
        while True:
            vt, wt = v + dv * lam, omega + domega * lam
            try:
                Ft, rt = total(vt, wt)
            except DomainError:
                rt = np.inf
            if rt < r or lam < 1e-3:
                break
            lam *= 0.5
        if not np.isfinite(rt):
            raise DomainError(f"Newton iterate left the analyticity disk at b={b:g}")
        v, omega, F, r = vt, wt, Ft, rt
        it += 1
        history.append(r)
        log.debug("b=%g newton %d residual %.3e damping %g", b, it, r, lam)
    X = v.X.copy()
    X[j0, k0] = b
    v = SymmetricField(g, X, v.Y)
    F, r = total(v, omega)
    return BranchPoint(float(b), float(omega), v, _norm(F), it)


def march_branch(bif: BifurcationPoint, start: BranchPoint, b_values, ws: ResidualWorkspace,
                 settings: ContinuationSettings) -> list:
    """Follow the branch from ``start`` through the amplitudes ``b_values`` in order.

    Each correction is warm-started from the previous point plus the predictor
    increment.  Failed corrections are retried with intermediate amplitudes,
    halving the step down to ``settings.db_min``.
    """
    points = []
    prev = start
    grid = ws.grid
    for target in b_values:
        target = float(target)
        b = prev.b
        db = target - b
        while True:
            b_next = b + db if abs(target - (b + db)) > 1e-15 else target
            dpred = predictor(bif, b_next, grid)[0] - predictor(bif, b, grid)[0]
            try:
                pt = newton_correct((prev.v + dpred, prev.omega), b_next, ws, bif,
                                    settings.tol, settings.max_iter)
            except (DivergenceError, DomainError) as exc:
                db /= 2
                log.info("correction failed at b=%g (%s); halving step to %g", b_next, exc, db)
                if abs(db) < settings.db_min:
                    raise ContinuationError(f"step underflow near b={b_next:g}", prev, points) from exc
                continue
            prev, b = pt, pt.b
            if b_next == target:
                break
            db = target - b
        points.append(prev)
    return points


def continue_branch(bif: BifurcationPoint, settings: ContinuationSettings = ContinuationSettings(),
                    ws: ResidualWorkspace | None = None) -> Branch:
    """Branch from ``b = 0`` to ``b_max`` in steps of ``db``."""
    grid = settings.grid()
    ws = ws or ResidualWorkspace(grid, bif.q, settings.padding)
    trivial = newton_correct((SymmetricField.zeros(grid), bif.omega0), 0.0, ws, bif)
    n = int(np.floor(settings.b_max / settings.db + 1e-9))
    targets = [settings.db * i for i in range(1, n + 1)]
    if settings.b_max - (targets[-1] if targets else 0.0) > 1e-15:
        targets.append(settings.b_max)
    points = [trivial]
    try:
        points += march_branch(bif, trivial, targets, ws, settings)
    except ContinuationError as exc:
        exc.points = points + exc.points
        raise
    return Branch(bif, points, settings)


# --------------------------------------------------------------------------
# diagnostics


def kernel_split(bif: BifurcationPoint, v: SymmetricField) -> tuple[SymmetricField, SymmetricField]:
    """L2-orthogonal split of ``v`` into kernel component and off-kernel remainder."""
    phi = bif.kernel_fn(v.grid)
    proj = phi * sym_inner(v, phi)
    return proj, v - proj


def translation_defect(v: SymmetricField, j0: int, k0: int) -> float:
    """``||v(t + pi/j0, s + pi/k0) - v|| / ||v||`` (0 for the zero field)."""
    u = embed(v)
    j, k = v.grid.modes()
    phase = np.exp(1j * np.pi * (j / j0 + k / k0))
    shifted = u.coeffs * phase[None]
    nrm = u.l2_norm()
    return 0.0 if nrm == 0 else float(np.sqrt(np.sum(np.abs(shifted - u.coeffs) ** 2)) / nrm)


@dataclass
class AsymptoticsReport:
    omega_slope: float | None
    omega_intercept: float | None
    omega_fit_rms: float | None
    field_slope: float | None
    field_intercept: float | None
    field_fit_rms: float | None
    curvature_sign: int
    offkernel_constant: float
    offkernel_slope: float | None
    kernel_translation_defect: float
    solution_translation_defect: float
    below_floor: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _fit(x: np.ndarray, y: np.ndarray):
    if np.all(y < 1e-14):
        return None, None, None
    mask = y >= 1e-14
    lx, ly = np.log(x[mask]), np.log(y[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), float(intercept), rms


def verify_asymptotics(branch: Branch, b_range: tuple[float, float] | None = None,
                       sobolev: float = 3.0) -> AsymptoticsReport:
    """Log-log fits of ``|omega - omega0|`` and ``||v - predictor||_{H^s}`` against ``b``."""
    bif = branch.bif
    pts = [p for p in branch.points if p.b > 0]
    if b_range is not None:
        pts = [p for p in pts if b_range[0] <= p.b <= b_range[1]]
    if len(pts) < 5:
        raise ValueError("need at least 5 branch points with b > 0")
    b = np.array([p.b for p in pts])
    dom = np.array([p.omega - bif.omega0 for p in pts])
    dev, kern, off = [], [], []
    for p in pts:
        pred = predictor(bif, p.b, p.v.grid)[0]
        dev.append(sobolev_norm(embed(p.v - pred), sobolev))
        kp, w = kernel_split(bif, p.v)
        kern.append(sobolev_norm(embed(kp), sobolev))
        off.append(sobolev_norm(embed(w), sobolev))
    dev, kern, off = map(np.array, (dev, kern, off))
    ws, wi, wr = _fit(b, np.abs(dom))
    fs, fi, fr = _fit(b, dev)
    below = [name for name, val in (("omega", ws), ("field", fs)) if val is None]
    ratio = off / kern**2
    os_ = _fit(kern, off)[0]
    signs = np.sign(dom[np.abs(dom) > 1e-14])
    curv = int(signs[0]) if signs.size and np.all(signs == signs[0]) else 0
    last = pts[-1]
    kp, _ = kernel_split(bif, last.v)
    return AsymptoticsReport(
        omega_slope=ws, omega_intercept=wi, omega_fit_rms=wr,
        field_slope=fs, field_intercept=fi, field_fit_rms=fr,
        curvature_sign=curv,
        offkernel_constant=float(np.max(ratio)),
        offkernel_slope=os_,
        kernel_translation_defect=translation_defect(kp, bif.j0, bif.k0),
        solution_translation_defect=translation_defect(last.v, bif.j0, bif.k0),
        below_floor=below,
    )


def full_space_residual(point: BranchPoint, bif: BifurcationPoint, padding: int = 4) -> float:
    """L2 norm of the residual of ``embed(v)`` in the unrestricted truncated space."""
    ws = ResidualWorkspace(point.v.grid, bif.q, padding)
    return full_residual(point.v, point.omega, ws).l2_norm()

