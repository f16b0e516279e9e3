"""Free dispersive propagator and a pseudo-spectral BO integrator.

``bo_evolve`` solves ``u_t = d/dx |D| u - d/dx (u^2)`` on the periodic box
with integrating-factor RK4: the linear part is propagated exactly by the
multiplier ``exp(i t xi |xi|)`` and the nonlinearity is dealiased by
truncation.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import AccuracyError, BlowUpError, ConfigError
from .field import Grid1D, HardyCoeffs, SampledField, norm, szego_project
from .io import write_csv, write_json

__all__ = [
    "Trajectory",
    "free_propagate",
    "bo_evolve",
    "contraction_check",
    "write_trajectory",
]

MAX_DT_XI2 = 1.5


@dataclass(frozen=True)
class Trajectory:
    grid: Grid1D
    times: np.ndarray
    fields: tuple
    means: np.ndarray
    l2_norms: np.ndarray
    dt: float = float("nan")

    def at(self, t: float) -> SampledField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return self.fields[i]

    def l2_drift(self) -> float:
        return float(np.abs(self.l2_norms - self.l2_norms[0]).max())


def _symbol(grid: Grid1D, t: float, real: bool) -> np.ndarray:
    xi = grid.xi
    s = np.exp(1j * t * xi * np.abs(xi))
    if real:
        # the Nyquist mode has no conjugate partner; leaving it alone keeps
        # real data real and the map unitary
        s[grid.n // 2] = 1.0
    return s


def free_propagate(f: SampledField, t: float) -> SampledField:
    """``U_0(t) f``: the multiplier ``exp(i t xi |xi|)`` on every mode."""
    out = np.fft.ifft(np.fft.fft(f.values) * _symbol(f.grid, t, f.real))
    return SampledField(f.grid, out.real if f.real else out)


def _check_resolved(u0: SampledField, frac: float = 0.1, tol: float = 1e-8):
    p = np.abs(np.fft.fft(u0.values)) ** 2
    total = p.sum()
    if total == 0:
        return
    top = np.abs(u0.grid.k) >= (1 - frac) * (u0.grid.n // 2)
    if p[top].sum() > tol * total:
        raise ConfigError(
            f"initial field has {p[top].sum() / total:.2e} relative energy in the top "
            f"{int(frac * 100)}% of frequencies; refine the grid"
        )


def bo_evolve(u0: SampledField, T: float, dt: float, dealias: float = 2 / 3,
              times: Optional[Sequence[float]] = None, l2_tol: float = 1e-6) -> Trajectory:
    """Integrate from 0 to ``T`` recording snapshots at ``times`` (default ``[0, T]``).

    The step is shrunk slightly per output interval so snapshots land exactly.
    ``l2_tol`` bounds the relative L2 drift; exceeding it raises AccuracyError.
    """
    if not u0.real:
        raise ConfigError("bo_evolve needs a real field")
    if not 0.5 <= dealias <= 2 / 3 + 1e-12:
        raise ConfigError(f"dealias fraction {dealias} outside [1/2, 2/3]")
    if not dt > 0 or not T >= 0:
        raise ConfigError("need dt > 0 and T >= 0")
    g = u0.grid
    keep = np.abs(g.k) <= dealias * (g.n // 2)
    xi_max = np.abs(g.xi[keep]).max()
    if dt * xi_max**2 > MAX_DT_XI2:
        raise ConfigError(
            f"dt={dt} too large: dt*xi_max^2 = {dt * xi_max**2:.3f} > {MAX_DT_XI2}"
        )
    _check_resolved(u0)
    times = [0.0, float(T)] if times is None else sorted({0.0, *map(float, times)})
    if times[-1] > T + 1e-12 or times[0] < 0:
        raise ConfigError("output times must lie in [0, T]")

    nl = -1j * g.xi * keep
    lin = 1j * g.xi * np.abs(g.xi)

    def N(vh):
        v = np.fft.ifft(vh).real
        return nl * np.fft.fft(v * v)

    vh = np.fft.fft(u0.values)
    l2_0 = norm(u0)
    fields, means, l2s = [u0], [float(np.mean(u0.values))], [l2_0]
    t = 0.0
    for target in times[1:]:
        span = target - t
        steps = max(1, int(np.ceil(span / dt - 1e-9)))
        h = span / steps
        E = np.exp(lin * h / 2)
        E2 = E * E
        for _ in range(steps):
            k1 = h * N(vh)
            k2 = h * N(E * (vh + k1 / 2))
            k3 = h * N(E * vh + k2 / 2)
            k4 = h * N(E2 * vh + E * k3)
            vh = E2 * vh + (E2 * k1 + 2 * E * (k2 + k3) + k4) / 6
            t += h
        if not np.all(np.isfinite(vh)):
            raise BlowUpError(f"non-finite values by t={t:.6g}", time=t)
        t = target
        u = SampledField(g, np.fft.ifft(vh).real)
        l2 = norm(u)
        if abs(l2 - l2_0) > l2_tol * max(l2_0, 1e-300):
            raise AccuracyError(f"L2 drift {abs(l2 - l2_0):.3e} at t={t:.6g} exceeds tolerance")
        fields.append(u)
        means.append(float(np.mean(u.values)))
        l2s.append(l2)
    return Trajectory(g, np.array(times), tuple(fields), np.array(means), np.array(l2s), dt)


def contraction_check(u0: SampledField, t: float, f0: Optional[HardyCoeffs] = None,
                      spec=None, dt: float = 2e-3):
    """``(||Pi u0||, ||Pi u(t)||)``.

    ``u(t)`` comes from the exact multisoliton formula when ``spec`` (an
    AsymptoticSpectrum whose solution at time 0 is ``u0``) is given, and from
    ``bo_evolve`` otherwise. ``f0`` overrides the Hardy component of ``u0``.
    """
    f0 = szego_project(u0) if f0 is None else f0
    if spec is not None:
        from .engine import exact_solution

        ut = SampledField(u0.grid, exact_solution(spec, t, u0.grid.x))
    else:
        ut = bo_evolve(u0, t, dt).fields[-1]
    return float(np.sqrt(f0.norm_sq())), float(np.sqrt(szego_project(ut).norm_sq()))


def write_trajectory(traj: Trajectory, outdir) -> list:
    """One ``snapshot_XXXX.csv`` (x, u) per time plus ``trajectory.json``."""
    outdir = Path(outdir)
    files = []
    for i, (t, f) in enumerate(zip(traj.times, traj.fields)):
        files.append(write_csv(outdir / f"snapshot_{i:04d}.csv", ["x", "u"], [traj.grid.x, f.values]))
    manifest = {
        "times": traj.times,
        "grid": {"x_min": traj.grid.x_min, "x_max": traj.grid.x_max, "n": traj.grid.n},
        "dt": traj.dt,
        "mean": traj.means,
        "l2_norm": traj.l2_norms,
        "snapshots": [p.name for p in files],
    }
    files.append(write_json(outdir / "trajectory.json", manifest))
    return files
