"""Rational soliton profiles and (possibly infinite) pole families.

A family is either a finite tuple of poles or a rule ``j -> p_j`` (j >= 1)
carrying a certified bound on the sup-norm tail ``sum_{j>J} 2/Im p_j``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import ConfigError, SingularityError, TruncationError
from .field import Grid1D, SampledField, szego_project

__all__ = [
    "SolitonParam",
    "SolitonFamily",
    "soliton_profile",
    "family_field",
    "summability",
    "hardy_closed_form",
    "l2_identity",
    "read_poles",
]


@dataclass(frozen=True)
class SolitonParam:
    p: complex

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        if not self.p.imag > 0:
            raise ConfigError(f"soliton pole must lie in the upper half-plane, got {self.p}")

    @property
    def im(self) -> float:
        return self.p.imag

    @property
    def velocity(self) -> float:
        return 1.0 / self.p.imag


@dataclass(frozen=True)
class SolitonFamily:
    """Ordered collection of upper half-plane poles.

    For rule-generated families ``tail(J)`` must bound ``sum_{j>J} 2/Im p_j``;
    ``index_limit`` caps how far truncation may go.
    """

    poles: tuple = ()
    rule: Optional[Callable[[int], complex]] = None
    tail: Optional[Callable[[int], float]] = None
    index_limit: int = 10**8
    ordered: bool = False

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        object.__setattr__(self, "poles", poles)
        if self.rule is None:
            for p in poles:
                SolitonParam(p)
            if self.ordered and any(b.imag <= a.imag for a, b in zip(poles, poles[1:])):
                raise ConfigError("ordered family needs strictly increasing Im p")
        elif self.tail is None:
            raise ConfigError("a rule-generated family needs a certified tail bound")

    @classmethod
    def from_points(cls, points: Iterable[complex], ordered: bool = False) -> "SolitonFamily":
        """Build a finite family, dropping poles on the real axis with a warning."""
        kept = []
        for p in points:
            p = complex(p)
            if p.imag < 0:
                raise ConfigError(f"pole {p} lies in the lower half-plane")
            if p.imag == 0:
                warnings.warn(f"dropping pole {p} with Im p = 0 (zero soliton)", stacklevel=2)
                continue
            kept.append(p)
        return cls(tuple(kept), ordered=ordered)

    @property
    def is_finite(self) -> bool:
        return self.rule is None

    def __len__(self) -> int:
        if not self.is_finite:
            raise TypeError("rule-generated family has no length")
        return len(self.poles)

    def take(self, J: Optional[int] = None) -> np.ndarray:
        """First ``J`` poles (all of them for finite families when J is None)."""
        if self.is_finite:
            return np.array(self.poles[: J if J is not None else len(self.poles)], dtype=complex)
        if J is None:
            raise ConfigError("rule-generated family needs an index bound")
        return np.array([self.rule(j) for j in range(1, J + 1)], dtype=complex)

    def tail_bound(self, J: int) -> float:
        if self.is_finite:
            return float(sum(2 / p.imag for p in self.poles[J:]))
        return float(self.tail(J))

    def truncation_index(self, tail_tol: float) -> int:
        """Smallest J with certified tail below ``tail_tol``."""
        if self.is_finite:
            for J in range(len(self.poles) + 1):
                if self.tail_bound(J) < tail_tol:
                    return J
            return len(self.poles)
        if self.tail(self.index_limit) >= tail_tol:
            raise TruncationError(
                f"tail bound {self.tail(self.index_limit):.3e} still above {tail_tol:.3e} "
                f"at index limit {self.index_limit}"
            )
        lo, hi = 0, self.index_limit
        while lo < hi:
            mid = (lo + hi) // 2
            if self.tail(mid) < tail_tol:
                hi = mid
            else:
                lo = mid + 1
        return lo


def soliton_profile(p, t, x):
    """``2 Im p / |x - t/Im p + p|^2``; broadcasts over ``x``."""
    p = p.p if isinstance(p, SolitonParam) else SolitonParam(p).p
    z = np.asarray(x, dtype=float) - t / p.imag + p
    return 2 * p.imag / (z.real**2 + z.imag**2)


def family_field(fam: SolitonFamily, t: float, grid: Grid1D, tail_tol: float = 0.0):
    """Sum of profiles sampled on ``grid``; returns ``(field, achieved_tail_bound)``.

    Finite families are summed in full when ``tail_tol`` is 0.
    """
    if fam.is_finite and tail_tol <= 0:
        J = len(fam.poles)
    else:
        J = fam.truncation_index(tail_tol)
    u = np.zeros(grid.n)
    for p in fam.take(J):
        u += soliton_profile(p, t, grid.x)
    return SampledField(grid, u), fam.tail_bound(J)


def _pair_terms(poles: np.ndarray) -> np.ndarray:
    d = poles[:, None] - np.conj(poles)[None, :]
    return poles.imag[:, None] / np.abs(d) ** 2


def summability(fam: SolitonFamily, J: Optional[int] = None):
    """Partial double sum ``sum_{j,k<=J} Im p_j / |p_j - conj p_k|^2``.

    Returns ``(value, monotone)`` where ``monotone`` reports that the partial
    sums over growing leading blocks never decrease.
    """
    poles = fam.take(J)
    if poles.size == 0:
        return 0.0, True
    T = _pair_terms(poles)
    # S(J') - S(J'-1) = row J' (k <= J') + column J' (j < J')
    rows = np.tril(T).sum(axis=1)
    cols = np.triu(T, 1).sum(axis=0)
    partial = np.cumsum(rows + cols)
    monotone = bool(np.all(np.diff(partial) >= 0))
    return float(partial[-1]), monotone


def hardy_closed_form(fam: SolitonFamily, z, J: Optional[int] = None):
    """``i sum_{j<=J} 1/(z + p_j)``, the Szegő projection of the family at ``t = 0``."""
    poles = fam.take(J)
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ConfigError("hardy_closed_form needs Im z >= 0")
    d = z[..., None] + poles
    if d.size and np.abs(d).min() < 1e-12:
        raise SingularityError("evaluation point collides with a pole")
    out = 1j * np.sum(1.0 / d, axis=-1)
    return out[()] if out.ndim == 0 else out


def l2_identity(fam: SolitonFamily, grid: Grid1D, J: Optional[int] = None, method: str = "spectral"):
    """``(lhs, rhs)`` for ``||Pi u0||^2 = 4 pi sum_{j,k} Im p_j / |p_j - conj p_k|^2``.

    ``method="spectral"`` measures the left side through the Szegő projection
    of the sampled field (Parseval); ``"direct"`` integrates
    ``|hardy_closed_form|^2`` over the box and adds the ``J^2 * 2/X`` far-field
    tail of ``|i J / x|^2`` beyond the box.
    """
    poles = fam.take(J)
    rhs = 4 * math.pi * float(_pair_terms(poles).sum()) if poles.size else 0.0
    sub = SolitonFamily(tuple(poles))
    if method == "spectral":
        u, _ = family_field(sub, 0.0, grid)
        lhs = szego_project(u).norm_sq()
    elif method == "direct":
        vals = hardy_closed_form(sub, grid.x.astype(complex)) if poles.size else np.zeros(grid.n)
        lhs = float(np.sum(np.abs(vals) ** 2) * grid.dx)
        X = min(-grid.x_min, grid.x_max)
        lhs += poles.size**2 * 2.0 / X
    else:
        raise ConfigError(f"unknown method {method!r}")
    return float(lhs), rhs


def read_poles(path) -> SolitonFamily:
    """Read ``re im`` per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read pole file {path}: {exc}") from exc
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 're im', got {line!r}")
        try:
            pts.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return SolitonFamily.from_points(pts)
