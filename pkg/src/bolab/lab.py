"""Error curves, the truncation/interaction bound calculus and the radiation experiment."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize, signal, special, stats

from .engine import AsymptoticSpectrum, exact_solution, soliton_sum
from .errors import ConfigError
from .evolution import bo_evolve, free_propagate
from .field import Grid1D, SampledField, norm
from .lax import discrete_spectrum
from .scattering import distorted_spectrum, radiation_profile

__all__ = [
    "SpectralLaw",
    "ErrorCurve",
    "DecayFit",
    "RadiationResult",
    "tail_error",
    "tail_certificate",
    "dyn_error",
    "dyn_error_factored",
    "minimax_bound",
    "gap_check",
    "measure_interaction_error",
    "fit_decay",
    "radiation_experiment",
    "fit_centers_heuristic",
]

CREST_WINDOW = 10.0
CREST_SAMPLES = 64
_CHUNK = 2048


@dataclass(frozen=True)
class SpectralLaw:
    """Eigenvalues ``lambda_k = -C1 k^-alpha``."""

    C1: float = 1.0
    C2: float = 1.0
    alpha: float = 2.0

    def __post_init__(self):
        if not (self.C1 > 0 and self.C2 > 0):
            raise ConfigError("law constants C1, C2 must be positive")
        if not self.alpha > 1:
            raise ConfigError("law exponent alpha must exceed 1")

    def lambdas(self, N: int) -> np.ndarray:
        k = np.arange(1, N + 1, dtype=float)
        return -self.C1 * k ** (-self.alpha)

    def spectrum(self, N: int, centers=None, phases=None) -> AsymptoticSpectrum:
        return AsymptoticSpectrum(self.lambdas(N), centers, phases)

    def schedule(self, t: float) -> float:
        """Truncation index balancing tail and interaction: ``t^(1/(3 alpha + 4))``."""
        return t ** (1.0 / (3 * self.alpha + 4))


@dataclass(frozen=True)
class ErrorCurve:
    times: np.ndarray
    errors: np.ndarray
    norm: str = "Linf"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        e = np.asarray(self.errors, dtype=float)
        if t.shape != e.shape or t.ndim != 1:
            raise ConfigError("times and errors must be 1-D of equal length")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("times must be strictly increasing")
        if np.any(e < 0):
            raise ConfigError("errors must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "errors", e)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float


def _as_list(lams) -> np.ndarray:
    if isinstance(lams, AsymptoticSpectrum):
        return lams.lambdas
    return np.asarray(lams, dtype=float)


def tail_error(lams: Union[Sequence[float], SpectralLaw], N: int) -> float:
    """``sum_{k>N} 4 |lambda_k|``; for a law this is the Hurwitz zeta value."""
    if N < 0:
        raise ConfigError("N must be nonnegative")
    if isinstance(lams, SpectralLaw):
        return float(4 * lams.C1 * special.zeta(lams.alpha, N + 1))
    lam = _as_list(lams)
    return float(4 * np.abs(lam[N:]).sum())


def tail_certificate(law: SpectralLaw, N: int) -> float:
    """Integral bound ``4 C1 N^(1-alpha) / (alpha - 1)`` on the law tail."""
    if N <= 0:
        return math.inf
    return 4 * law.C1 * N ** (1 - law.alpha) / (law.alpha - 1)


def dyn_error(lams, N: Optional[int] = None) -> float:
    """``sum_{j,k,l <= N; j != l, k != l} |lambda_k| / (|lambda_j - lambda_l|^2 |lambda_k - lambda_l|)``.

    Plain triple loop; see :func:`dyn_error_factored` for the O(N^2) form.
    """
    lam = [float(v) for v in _as_list(lams)[:N]]
    if len(set(lam)) != len(lam):
        raise ConfigError("duplicate eigenvalues make the interaction sum singular")
    total = 0.0
    idx = range(len(lam))
    for j, k, l in itertools.product(idx, idx, idx):
        if j == l or k == l:
            continue
        total += abs(lam[k]) / ((lam[j] - lam[l]) ** 2 * abs(lam[k] - lam[l]))
    return total


def _inverse_gaps(lam: np.ndarray) -> np.ndarray:
    d = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(d, np.inf)
    if np.any(d == 0):
        raise ConfigError("duplicate eigenvalues make the interaction sum singular")
    return 1.0 / d


def dyn_error_factored(lams, N: Optional[int] = None) -> float:
    """Same sum as :func:`dyn_error` written as ``sum_l A_l B_l``."""
    lam = _as_list(lams)[:N]
    if lam.size < 2:
        return 0.0
    inv = _inverse_gaps(lam)
    A = (inv**2).sum(axis=0)
    B = (np.abs(lam)[:, None] * inv).sum(axis=0)
    return float(np.dot(A, B))


def _dyn_prefix(lam: np.ndarray) -> np.ndarray:
    """``dyn_error(lam, N)`` for N = 1..len(lam) at once."""
    inv = _inverse_gaps(lam)
    cumA = np.cumsum(inv**2, axis=0)  # cumA[N-1, l] = sum_{j<=N} 1/d_jl^2
    cumB = np.cumsum(np.abs(lam)[:, None] * inv, axis=0)
    prod = np.tril(cumA * cumB)  # keep l <= N
    return prod.sum(axis=1)


def _law_cap(law: SpectralLaw, t: float) -> int:
    return int(min(2000, max(32, math.ceil(4 * law.schedule(t)))))


def minimax_bound(lams, t: float, cap: Optional[int] = None):
    """``(N_star, min_N tail_error(N) + dyn_error(N)/t)`` over N = 1..cap."""
    if not t > 0:
        raise ConfigError("t must be positive")
    if isinstance(lams, SpectralLaw):
        cap = _law_cap(lams, t) if cap is None else int(cap)
        lam = lams.lambdas(cap)
        tails = 4 * lams.C1 * special.zeta(lams.alpha, np.arange(1, cap + 1) + 1)
    else:
        lam = _as_list(lams)
        if cap is not None:
            lam = lam[:cap]
        if lam.size == 0:
            return 0, 0.0
        a = 4 * np.abs(lam)
        tails = a.sum() - np.cumsum(a)
        tails = np.maximum(tails, 0.0)
        tails[-1] = 0.0
    total = tails + _dyn_prefix(lam) / t
    i = int(np.argmin(total))
    return i + 1, float(total[i])


def gap_check(lams, C1: float, C2: float, alpha: float, rtol: float = 1e-12):
    """Check ``|lambda_k| <= C1 k^-alpha`` and ``|lambda_j - lambda_k| >= C2 |j-k| max(j,k)^(-alpha-1)``.

    Returns ``(ok, worst_pair)``; ``worst_pair`` (1-based) has the smallest
    ratio of actual to required gap, or is None for a single eigenvalue.
    """
    lam = _as_list(lams)
    if lam.size == 0:
        raise ConfigError("gap_check needs a nonempty list")
    k = np.arange(1, lam.size + 1, dtype=float)
    amp_ok = bool(np.all(np.abs(lam) <= C1 * k ** (-alpha) * (1 + rtol)))
    if lam.size == 1:
        return amp_ok, None
    J, K = np.triu_indices(lam.size, 1)
    need = C2 * (K - J) * np.maximum(k[J], k[K]) ** (-alpha - 1)
    ratio = np.abs(lam[J] - lam[K]) / need
    w = int(np.argmin(ratio))
    gap_ok = bool(ratio[w] >= 1 - rtol)
    return amp_ok and gap_ok, (int(J[w]) + 1, int(K[w]) + 1)


def _difference(spec: AsymptoticSpectrum, t: float, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.size)
    for s in range(0, x.size, _CHUNK):
        xs = x[s : s + _CHUNK]
        out[s : s + _CHUNK] = exact_solution(spec, t, xs) - soliton_sum(spec, t, xs)
    return out


def _crests(spec: AsymptoticSpectrum, t: float) -> np.ndarray:
    return spec.c * t - spec.centers


def _base_grid(spec: AsymptoticSpectrum, t: float, n: int = 4096) -> np.ndarray:
    cr = _crests(spec, t)
    pad = 20 * spec.y.max()
    return np.linspace(cr.min() - pad, cr.max() + pad, n)


def measure_interaction_error(spec: AsymptoticSpectrum, times, grid: Optional[Grid1D] = None,
                              kind: str = "Linf") -> ErrorCurve:
    """``|exact_solution - soliton_sum|`` over x for each t.

    ``kind="Linf"`` takes the sup over the base points (``grid.x`` or an
    automatic span covering all crests) plus 64-point windows of width
    ``10 y_k`` around every predicted crest. ``kind="L2"`` integrates over the
    base points by the trapezoid rule.
    """
    times = np.asarray(times, dtype=float)
    errs = []
    for t in times:
        if len(spec) <= 1:
            errs.append(0.0)
            continue
        base = grid.x if grid is not None else _base_grid(spec, t)
        if kind == "L2":
            d = _difference(spec, t, base)
            errs.append(float(np.sqrt(integrate.trapezoid(d**2, base))))
            continue
        if kind != "Linf":
            raise ConfigError(f"unknown norm kind {kind!r}")
        s = np.linspace(-0.5, 0.5, CREST_SAMPLES)
        win = (_crests(spec, t)[:, None] + CREST_WINDOW * spec.y[:, None] * s).ravel()
        pts = np.concatenate([base, win])
        errs.append(float(np.abs(_difference(spec, t, pts)).max()))
    return ErrorCurve(times, np.array(errs), kind)


def fit_decay(curve: ErrorCurve) -> DecayFit:
    """Least squares of ``log error`` on ``log t``."""
    if curve.times.size < 3:
        raise ConfigError("fit_decay needs at least 3 points")
    if np.any(curve.errors <= 0) or np.any(curve.times <= 0):
        raise ConfigError("fit_decay needs positive times and errors")
    res = stats.linregress(np.log(curve.times), np.log(curve.errors))
    r2 = float(min(1.0, max(0.0, res.rvalue**2)))
    return DecayFit(float(res.slope), float(res.intercept), r2)


@dataclass(frozen=True)
class RadiationResult:
    l2: ErrorCurve
    linf: ErrorCurve
    profile: SampledField
    edge_fraction: float
    final_bound_states: int = 0


def radiation_experiment(u0: SampledField, times, dt: float = 2e-3, eps: Optional[float] = None,
                         M: Optional[int] = None, tol: float = 1e-10) -> RadiationResult:
    """Distance between the BO flow and the free flow of the radiation profile.

    ``r(t) = u(t) - U_0(t) u_inf`` in L2 and L-infinity, with ``u_inf`` built
    once from the distorted coefficients of ``u0``. Refuses data that carries
    a bound state. ``edge_fraction`` is the share of L2 mass in the outer 10%
    of the box at the last time; large values mean the periodic wrap-around
    has been reached. The bound-state count is recomputed on the last
    snapshot rather than assumed to be conserved.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ConfigError("times must be positive and strictly increasing")
    neg = discrete_spectrum(u0, eps, M).negative_part
    if neg.size:
        raise ConfigError(
            f"initial data has {neg.size} bound state(s) (lambda = {neg.tolist()}); "
            "mixed soliton/radiation data needs fit_centers_heuristic"
        )
    g = u0.grid
    if not np.any(u0.values):
        zero = np.zeros_like(times)
        return RadiationResult(ErrorCurve(times, zero, "L2"), ErrorCurve(times, zero, "Linf"), u0, 0.0)
    prof = radiation_profile(u0, distorted_spectrum(u0, tol=tol))
    traj = bo_evolve(u0, float(times[-1]), dt, times=times)
    l2, linf = [], []
    for t in times:
        r = traj.at(t).values - free_propagate(prof, t).values
        l2.append(norm(SampledField(g, r)))
        linf.append(float(np.abs(r).max()))
    last = traj.fields[-1].values
    edge = np.abs(g.x - 0.5 * (g.x_min + g.x_max)) > 0.4 * g.length
    frac = float(np.sum(last[edge] ** 2) / max(np.sum(last**2), 1e-300))
    if frac > 1e-3:
        warnings.warn(f"{frac:.2e} of the L2 mass sits near the box edge; wrap-around likely", stacklevel=2)
    late = discrete_spectrum(traj.fields[-1], eps, M).negative_part.size
    if late:
        warnings.warn(f"{late} bound state(s) in the evolved field at t={times[-1]:g}", stacklevel=2)
    return RadiationResult(ErrorCurve(times, np.array(l2), "L2"), ErrorCurve(times, np.array(linf), "Linf"),
                           prof, frac, late)


def fit_centers_heuristic(u: SampledField, lambdas, t: float) -> AsymptoticSpectrum:
    """HEURISTIC: least-squares crest alignment of a soliton sum to ``u`` at time ``t``.

    Not part of the theory: asymptotic centers are not computable from the
    initial data, so this fits them to a late snapshot. Starting guesses are
    the local maxima closest to each predicted height ``2 / y_k``.
    """
    lam = np.asarray(lambdas, dtype=float)
    y = 1 / (2 * np.abs(lam))
    c = 2 * np.abs(lam)
    x = u.grid.x
    v = u.values
    peaks = list(signal.find_peaks(v)[0])
    if len(peaks) < lam.size:
        raise ConfigError(f"found {len(peaks)} crests for {lam.size} solitons")
    guess = []
    for k in np.argsort(y):  # tallest first
        i = min(peaks, key=lambda p: abs(v[p] - 2 / y[k]))
        peaks.remove(i)
        guess.append((k, c[k] * t - x[i]))
    guess = np.array([g for _, g in sorted(guess)])

    def resid(centers):
        return soliton_sum(AsymptoticSpectrum(lam, centers), t, x) - u.values

    sol = optimize.least_squares(resid, guess)
    return AsymptoticSpectrum(lam, sol.x)
