"""Jost functions, distorted Fourier coefficients and the radiation profile.

The Jost function solves the Volterra equation ``m = e_lam + i K m`` with
``K m(x) = e^{i lam x} int_{x_min}^x e^{-i lam y} Pi(u m)(y) dy``; the box edge
plays the role of ``-inf``. Solves are batched over ``lam``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import ConfigError, NonConvergenceError
from .field import Grid1D, HardyCoeffs, SampledField, hardy_field, szego_project, to_real_field

__all__ = [
    "JostSolution",
    "DistortedSpectrum",
    "volterra_operator",
    "jost_solve",
    "jost_solve_many",
    "born_iterate",
    "distorted_coefficient",
    "distorted_spectrum",
    "radiation_profile",
]

DENSE_LIMIT = 1024


@dataclass(frozen=True)
class JostSolution:
    grid: Grid1D
    lam: float
    m: np.ndarray
    residual: float
    iterations: int = 0
    method: str = "fixed-point"

    def boundary_defect(self) -> float:
        return float(abs(np.exp(-1j * self.lam * self.grid.x_min) * self.m[0] - 1))


@dataclass(frozen=True)
class DistortedSpectrum:
    lams: np.ndarray
    zeta: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.lams) <= 0):
            raise ConfigError("distorted coefficients are defined for lambda > 0 only")

    def mass(self) -> float:
        """``(1/2pi) sum |zeta|^2 dlam`` on the (uniform) lambda grid."""
        if self.lams.size < 2:
            return 0.0
        dlam = self.lams[1] - self.lams[0]
        return float(np.sum(np.abs(self.zeta) ** 2) * dlam / (2 * np.pi))


def _projector(grid: Grid1D) -> np.ndarray:
    w = np.zeros(grid.n)
    w[1 : grid.n // 2] = 1.0
    w[0] = 0.5
    return w


class _Volterra:
    """``K`` for a fixed field and a batch of ``lam`` values (arrays of shape (B, n))."""

    def __init__(self, u: SampledField, lams: np.ndarray):
        g = u.grid
        self.grid = g
        self.u = u.values
        self.lams = np.asarray(lams, dtype=float).reshape(-1, 1)
        self.carrier = np.exp(1j * self.lams * g.x)
        self.w = _projector(g)

    def apply(self, m: np.ndarray) -> np.ndarray:
        g = np.fft.ifft(np.fft.fft(self.u * m, axis=-1) * self.w, axis=-1)
        h = g * np.conj(self.carrier)
        cum = np.zeros_like(h)
        np.cumsum(0.5 * self.grid.dx * (h[..., 1:] + h[..., :-1]), axis=-1, out=cum[..., 1:])
        return self.carrier * cum

    def residual(self, m: np.ndarray) -> np.ndarray:
        return np.abs(m - self.carrier - 1j * self.apply(m)).max(axis=-1)


def volterra_operator(u0: SampledField, lam: float):
    """``m -> K_{u,lam} m`` as a plain function on grid samples."""
    K = _Volterra(u0, [lam])
    return lambda m: K.apply(np.asarray(m)[None, :])[0]


def born_iterate(u0: SampledField, lam: float) -> np.ndarray:
    """First Born approximation ``e_lam + i K e_lam``."""
    K = _Volterra(u0, [lam])
    return (K.carrier + 1j * K.apply(K.carrier))[0]


def _direct_solve(u0: SampledField, lam: float, tol: float):
    K = _Volterra(u0, [lam])
    n = u0.grid.n
    rhs = K.carrier[0]
    if n <= DENSE_LIMIT:
        cols = K.apply(np.eye(n, dtype=complex))  # row j is K applied to e_j
        A = np.eye(n) - 1j * cols.T
        m = np.linalg.solve(A, rhs)
        return m, 0, "dense"
    op = LinearOperator((n, n), matvec=lambda v: v - 1j * K.apply(v[None, :])[0], dtype=complex)
    m, info = gmres(op, rhs, x0=rhs, rtol=tol * 1e-2, atol=0.0, restart=200, maxiter=50)
    return m, info, "gmres"


def jost_solve_many(u0: SampledField, lams, tol: float = 1e-10, max_iter: int = 200,
                    batch: int = 128, fallback: bool = True) -> list:
    """Jost functions for each ``lam`` in ``lams``.

    Fixed-point iteration runs on whole batches; values where it stalls or
    diverges go to a direct solve of ``(1 - iK) m = e_lam`` (dense for small
    grids, restarted GMRES otherwise).
    """
    if not u0.real:
        raise ConfigError("Jost functions need a real field")
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(lams <= 0):
        raise ConfigError("lambda must be positive")
    out = []
    for s in range(0, lams.size, batch):
        K = _Volterra(u0, lams[s : s + batch])
        e = K.carrier
        m = e.copy()
        done = np.zeros(len(m), dtype=bool)
        iters = np.zeros(len(m), dtype=int)
        for it in range(1, max_iter + 1):
            new = e + 1j * K.apply(m)
            step = np.abs(new - m).max(axis=-1)
            m = np.where(done[:, None], m, new)
            iters[~done] = it
            done |= step < tol
            if done.all() or np.all(done | ~(step < 1e6)):
                break
        res = K.residual(m)
        for i, lam in enumerate(K.lams[:, 0]):
            if res[i] <= tol:
                out.append(JostSolution(u0.grid, float(lam), m[i], float(res[i]), int(iters[i])))
                continue
            if not fallback:
                raise NonConvergenceError(f"Jost iteration stalled at lambda={lam}", residual=float(res[i]))
            mi, info, how = _direct_solve(u0, float(lam), tol)
            r = float(_Volterra(u0, [lam]).residual(mi[None, :])[0])
            if not r <= tol:
                raise NonConvergenceError(
                    f"Jost solve failed at lambda={lam} ({how}, info={info})", residual=r
                )
            out.append(JostSolution(u0.grid, float(lam), mi, r, int(iters[i]), how))
    return out


def jost_solve(u0: SampledField, lam: float, tol: float = 1e-10, max_iter: int = 200,
               fallback: bool = True) -> JostSolution:
    return jost_solve_many(u0, [lam], tol, max_iter, fallback=fallback)[0]


def distorted_coefficient(u0: SampledField, lam: float, tol: float = 1e-10) -> complex:
    """``zeta(lam) = <Pi u0, m(., lam)>``, conjugate-linear in the second slot."""
    sol = jost_solve(u0, lam, tol)
    piu = hardy_field(szego_project(u0)).values
    return complex(np.sum(piu * np.conj(sol.m)) * u0.grid.dx)


def _default_lams(u0: SampledField, rel: float = 1e-13) -> np.ndarray:
    h = szego_project(u0)
    a = np.abs(h.coeffs)
    xi = h.xi
    if a.max() == 0:
        return xi[:1]
    kmax = np.nonzero(a > rel * a.max())[0].max()
    kmax = min(int(1.5 * (kmax + 1)) + 1, xi.size)
    return xi[:kmax]


def distorted_spectrum(u0: SampledField, lams=None, tol: float = 1e-10, batch: int = 128) -> DistortedSpectrum:
    """``zeta`` on ``lams`` (default: box frequencies up to where ``Pi u0`` is negligible)."""
    lams = _default_lams(u0) if lams is None else np.atleast_1d(np.asarray(lams, dtype=float))
    sols = jost_solve_many(u0, lams, tol, batch=batch)
    piu = hardy_field(szego_project(u0)).values
    M = np.array([s.m for s in sols])
    zeta = (M.conj() @ piu) * u0.grid.dx
    return DistortedSpectrum(lams, zeta, np.array([s.residual for s in sols]))


def radiation_profile(u0: SampledField, spectrum: Optional[DistortedSpectrum] = None,
                      zero_mode: str = "mean", tol: float = 1e-10) -> SampledField:
    """Real radiation profile ``2 Re`` of the Hardy function with coefficients ``zeta``.

    ``spectrum`` must sit on the box frequencies ``k dxi``; frequencies it does
    not cover get zero. The zero mode carries no L2 mass on the line and is not
    determined by ``zeta``: ``"mean"`` copies the conserved mean of ``u0``,
    ``"extrapolate"`` takes ``zeta`` at the first frequency, ``"none"`` sets 0.
    """
    grid = u0.grid
    if spectrum is None:
        spectrum = distorted_spectrum(u0, tol=tol)
    idx = np.rint(spectrum.lams / grid.dxi).astype(int)
    if np.any(np.abs(idx * grid.dxi - spectrum.lams) > 1e-9 * grid.dxi) or np.any(idx >= grid.n // 2):
        raise ConfigError("lambda grid must consist of positive box frequencies k*dxi, k < n/2")
    c = np.zeros(grid.n_hardy, dtype=complex)
    c[idx - 1] = spectrum.zeta / grid.length
    if zero_mode == "mean":
        zero = np.mean(u0.values)
    elif zero_mode == "extrapolate":
        zero = c[0] if idx.size and idx.min() == 1 else 0.0
    elif zero_mode == "none":
        zero = 0.0
    else:
        raise ConfigError(f"unknown zero_mode {zero_mode!r}")
    return to_real_field(HardyCoeffs(grid, c, zero))
