"""Periodic-box discretization of the line: grids, the Szegő projector, |D|, norms.

Fourier coefficients use absolute phases, ``f(x) = sum_k c_k exp(i xi_k x)`` with
``c_k = mean_j f(x_j) exp(-i xi_k x_j)``, so shifting the box does not rotate
them and ``L * c_k`` approximates the line transform ``f_hat(xi_k)``.

The zero frequency is not a Hardy-space coefficient. A real field's mean
coefficient is kept on :class:`HardyCoeffs` as the boundary value ``zero``
(``f_hat(0+) / L``) and enters the projection with weight 1/2, the trapezoid
weight of the endpoint of the half-line ``(0, inf)``. With this convention
``||Pi u||^2 = ||u||^2 / 2`` holds exactly for real fields on the box.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, NumericalError

__all__ = [
    "Grid1D",
    "SampledField",
    "HardyCoeffs",
    "fourier_coefficients",
    "from_fourier_coefficients",
    "szego_project",
    "to_real_field",
    "hardy_field",
    "abs_d",
    "derivative",
    "norm",
    "gagliardo_nirenberg_ratio",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[x_min, x_max)`` with ``n`` points."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        n = int(self.n)
        if n < 8 or n & (n - 1):
            raise ConfigError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.x_max > self.x_min:
            raise ConfigError(f"empty box [{self.x_min}, {self.x_max})")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @classmethod
    def centered(cls, half_width: float = 200.0, n: int = 4096) -> "Grid1D":
        return cls(-half_width, half_width, n)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavenumbers in FFT order."""
        return np.fft.fftfreq(self.n, 1.0 / self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        return self.k * self.dxi

    @property
    def n_hardy(self) -> int:
        """Number of strictly positive non-Nyquist frequencies."""
        return self.n // 2 - 1

    @cached_property
    def hardy_xi(self) -> np.ndarray:
        return self.dxi * np.arange(1, self.n // 2)

    @cached_property
    def _phase(self) -> np.ndarray:
        return np.exp(-1j * self.xi * self.x_min)


@dataclass(frozen=True)
class SampledField:
    """Samples of a function on a :class:`Grid1D`.

    Real fields are stored as float arrays; passing ``real=True`` with values
    whose imaginary part is not negligible raises.
    """

    grid: Grid1D
    values: np.ndarray
    real: bool = False

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n,):
            raise ConfigError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if self.real or not np.iscomplexobj(v):
            if np.iscomplexobj(v):
                scale = np.abs(v).max()
                if np.abs(v.imag).max() > 1e-12 * scale:
                    raise ConfigError("field flagged real has a non-negligible imaginary part")
                v = v.real
            v = v.astype(float)
            object.__setattr__(self, "real", True)
        else:
            v = v.astype(complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> "SampledField":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "SampledField":
        return cls(grid, np.zeros(grid.n))

    def __add__(self, other: "SampledField") -> "SampledField":
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        return SampledField(self.grid, self.values - other.values)

    def scaled(self, c) -> "SampledField":
        return SampledField(self.grid, c * self.values)


@dataclass(frozen=True)
class HardyCoeffs:
    """Positive-frequency coefficients ``c_k`` at ``xi_k = k*dxi``, k = 1..n/2-1.

    ``zero`` is the boundary value at frequency 0+, weighted by 1/2 wherever the
    projection is reassembled or measured.
    """

    grid: Grid1D
    coeffs: np.ndarray
    zero: complex = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_hardy,):
            raise ConfigError(f"expected {self.grid.n_hardy} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "zero", complex(self.zero))

    @property
    def xi(self) -> np.ndarray:
        return self.grid.hardy_xi

    def norm_sq(self) -> float:
        """Discrete ``||f||_2^2``: Parseval sum with the half-weighted endpoint."""
        return self.grid.length * (np.sum(np.abs(self.coeffs) ** 2) + 0.5 * abs(self.zero) ** 2)

    def boundary_value(self) -> complex:
        """``I_+(f) = f_hat(0+)`` on the box."""
        return self.grid.length * self.zero


def fourier_coefficients(values: np.ndarray, grid: Grid1D, axis: int = -1) -> np.ndarray:
    """Absolute-phase Fourier series coefficients, FFT order."""
    return np.fft.fft(values, axis=axis) / grid.n * grid._phase


def from_fourier_coefficients(c: np.ndarray, grid: Grid1D, axis: int = -1) -> np.ndarray:
    return np.fft.ifft(c / grid._phase * grid.n, axis=axis)


def szego_project(f: SampledField) -> HardyCoeffs:
    c = fourier_coefficients(f.values, f.grid)
    return HardyCoeffs(f.grid, c[1 : f.grid.n // 2], zero=c[0])


def _full_spectrum(h: HardyCoeffs) -> np.ndarray:
    n = h.grid.n
    c = np.zeros(n, dtype=complex)
    c[0] = 0.5 * h.zero
    c[1 : n // 2] = h.coeffs
    return c


def hardy_field(h: HardyCoeffs) -> SampledField:
    """The complex function ``Pi f`` sampled on the grid."""
    return SampledField(h.grid, from_fourier_coefficients(_full_spectrum(h), h.grid))


def to_real_field(h: HardyCoeffs) -> SampledField:
    """``2 Re(Pi f)``."""
    return SampledField(h.grid, 2 * hardy_field(h).values.real, real=True)


def _multiplier(f: SampledField, symbol: np.ndarray) -> SampledField:
    out = np.fft.ifft(np.fft.fft(f.values) * symbol)
    if f.real:
        out = out.real
    return SampledField(f.grid, out)


def abs_d(f: SampledField) -> SampledField:
    """Fourier multiplier ``|xi|``."""
    return _multiplier(f, np.abs(f.grid.xi))


def derivative(f: SampledField) -> SampledField:
    """Spectral ``d/dx``; the Nyquist mode is dropped so real input stays real."""
    sym = 1j * f.grid.xi
    sym[f.grid.n // 2] = 0.0
    return _multiplier(f, sym)


def norm(f: SampledField, kind: str = "L2", s: float = 0.0, alpha: float = 0.0) -> float:
    """Norms used across the lab.

    ``kind`` is one of ``"L2"``, ``"Linf"``, ``"Hs"`` (weights ``(1+xi^2)^(s/2)``)
    and ``"weighted"`` (the ``Hs`` norm of ``<x>^alpha f``).
    """
    if s < 0 or alpha < 0:
        raise ConfigError(f"norm exponents must be nonnegative (s={s}, alpha={alpha})")
    v = f.values
    g = f.grid
    if kind == "L2":
        return float(np.sqrt(np.sum(np.abs(v) ** 2) * g.dx))
    if kind == "Linf":
        return float(np.abs(v).max()) if v.size else 0.0
    if kind == "weighted":
        v = v * (1 + g.x**2) ** (alpha / 2)
    elif kind != "Hs":
        raise ConfigError(f"unknown norm kind {kind!r}")
    c = np.fft.fft(v) / g.n
    return float(np.sqrt(g.length * np.sum((1 + g.xi**2) ** s * np.abs(c) ** 2)))


def gagliardo_nirenberg_ratio(f: SampledField) -> float:
    """``||f||_inf^2 / (||f||_2 ||f'||_2)``; at most 1 for decaying real fields."""
    denom = norm(f, "L2") * norm(derivative(f), "L2")
    if denom < 1e-300:
        raise NumericalError("Gagliardo-Nirenberg ratio undefined for a (numerically) zero field")
    return norm(f, "Linf") ** 2 / denom
