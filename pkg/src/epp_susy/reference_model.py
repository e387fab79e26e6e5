"""
Uncoupled reference problem
===========================

N independent channels, each carrying the reflectionless-type potential

    v0(r, a) = 2 a^2 / sinh^2(a r)        (l = 0, nu = 1)

with closed-form Jost solution, regular solution and Jost function.  Units:
hbar = 2m = 1, energies are k^2.

Numerics
--------
Near the origin the closed forms cancel catastrophically (the regular solution
is a difference of two O(1) terms that vanishes like r^2).  They are rewritten
in terms of

    sinc(y) - cos(y),   x coth x - 1,   (x / sinh x)^2 - 1

each of which is evaluated by a short Taylor series for small arguments.

For complex k the solutions grow or decay exponentially.  Every solution
routine takes ``shift`` and returns the value multiplied by ``exp(-shift)``;
the shift is applied inside the exponentials so no intermediate overflows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PoleError

_SERIES_CUT = 0.1


@dataclass(frozen=True)
class ChannelModel:
    """Channel parameters of the uncoupled sinh^-2 model."""

    a: tuple[float, ...]
    l: tuple[int, ...] = field(default=None)
    nu: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if not a:
            raise DomainError("at least one channel is required")
        if any(not np.isfinite(x) or x <= 0 for x in a):
            raise DomainError(f"channel parameters must be positive, got {a}")
        n = len(a)
        l = tuple(self.l) if self.l is not None else (0,) * n
        nu = tuple(self.nu) if self.nu is not None else (1,) * n
        if len(l) != n or len(nu) != n:
            raise DomainError("l and nu must have one entry per channel")
        if any(x != 0 for x in l) or any(x != 1 for x in nu):
            raise DomainError("the sinh^-2 model supports only l = 0, nu = 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "nu", nu)

    @property
    def n_channels(self) -> int:
        return len(self.a)

    @property
    def a_array(self) -> np.ndarray:
        return np.array(self.a)


# -- cancellation-free building blocks ---------------------------------------

def _poly(x2, coeffs):
    out = np.zeros_like(x2)
    for c in reversed(coeffs):
        out = out * x2 + c
    return out


def _xcothx_m1(x):
    """x coth(x) - 1 for real x >= 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    direct = xs / np.tanh(xs) - 1.0
    x2 = x * x
    series = x2 * _poly(x2, [1 / 3, -1 / 45, 2 / 945, -1 / 4725, 2 / 93555])
    return np.where(small, series, direct)


def _xcschx_sq_m1(x):
    """(x / sinh x)^2 - 1 for real x >= 0, overflow-safe for large x."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, np.abs(x))
    ratio = 2.0 * xs * np.exp(-xs) / -np.expm1(-2.0 * xs)
    direct = ratio * ratio - 1.0
    x2 = x * x
    series = x2 * _poly(x2, [-1 / 3, 1 / 15, -2 / 189, 1 / 675, -2 / 10395])
    return np.where(small, series, direct)


def _trig_scaled(y, shift):
    """sin(y) e^-shift, cos(y) e^-shift, sinc(y) e^-shift, (sinc(y) - cos(y)) e^-shift."""
    y = np.asarray(y, dtype=complex)
    ep = np.exp(1j * y - shift)
    em = np.exp(-1j * y - shift)
    sin = (ep - em) / 2j
    cos = (ep + em) / 2
    small = np.abs(y) < _SERIES_CUT
    ys = np.where(small, 1.0, y)
    sinc_direct = sin / ys
    y2 = y * y
    scale = np.exp(-np.asarray(shift, dtype=complex))
    sinc_series = scale * _poly(y2, [1.0, -1 / 6, 1 / 120, -1 / 5040, 1 / 362880, -1 / 39916800])
    smc_series = scale * y2 * _poly(y2, [1 / 3, -1 / 30, 1 / 840, -1 / 45360, 1 / 3991680])
    sinc = np.where(small, sinc_series, sinc_direct)
    smc = np.where(small, smc_series, sinc_direct - cos)
    return sin, cos, sinc, smc


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("radius must be positive")
    return r


# -- public scalar/vector functions ------------------------------------------

def v0(r, a):
    """2 a^2 / sinh^2(a r)."""
    r = _check_r(r)
    x = np.asarray(a * r, dtype=float)
    small = x < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    csch = 2.0 * np.exp(-xs) / -np.expm1(-2.0 * xs)
    direct = 2.0 * (a * csch) ** 2
    near = 2.0 * (1.0 + _xcschx_sq_m1(x)) / (r * r)
    return np.where(small, near, direct)


def jost_solution(k, r, a, shift=0.0):
    """Jost solution ``exp(ikr) (k + i a coth(ar)) / (k + ia)`` and its r-derivative."""
    r = _check_r(r)
    k = np.asarray(k, dtype=complex)
    den = k + 1j * a
    if np.any(den == 0):
        raise PoleError("Jost solution has a pole at k = -i a")
    acoth = (1.0 + _xcothx_m1(a * r)) / r
    acsch2 = (1.0 + _xcschx_sq_m1(a * r)) / (r * r)
    e = np.exp(1j * k * r - shift)
    val = e * (k + 1j * acoth) / den
    der = e * (1j * k * (k + 1j * acoth) - 1j * acsch2) / den
    return val, der


def regular_solution(k, r, a, shift=0.0):
    """Regular solution normalised as ``r^2 / 3`` at the origin, and its r-derivative.

    Equals ``-(k cos kr - a coth(ar) sin kr) / (k (k^2 + a^2))``, which is even
    in k and finite at k = 0.
    """
    r = _check_r(r)
    k = np.asarray(k, dtype=complex)
    den = k * k + a * a
    if np.any(den == 0):
        raise PoleError("regular solution has a pole at k^2 = -a^2")
    x = a * r
    sin, cos, sinc, smc = _trig_scaled(k * r, shift)
    q1 = _xcothx_m1(x)
    p1 = _xcschx_sq_m1(x)
    val = (smc + sinc * q1) / den
    der = (k * k * r * sinc - (smc + sinc * p1 - cos * q1) / r) / den
    return val, der


def jost_function(k, a):
    """Jost function ``i / (k + i a)`` (limit of r f0(k, r) at the origin)."""
    k = np.asarray(k, dtype=complex)
    den = k + 1j * np.asarray(a)
    if np.any(den == 0):
        raise PoleError("Jost function has a pole at k = -i a")
    return 1j / den


def s0(k, a):
    """Single-channel S-matrix ``(a - ik) / (a + ik)``."""
    return (a - 1j * k) / (a + 1j * k)


def phase_shift(k, a):
    return -np.arctan(k / np.asarray(a))


# -- matrix-valued wrappers --------------------------------------------------

def assemble_diagonal(model: ChannelModel, fn: Callable) -> Callable:
    """Lift ``fn(..., a)`` to a diagonal-matrix function over the channels.

    ``fn`` must broadcast over a trailing channel axis.  The returned function
    takes the same leading arguments (radius arrays may have any shape) and
    returns arrays of shape ``(..., N, N)``; tuple results are lifted
    element-wise.
    """
    a = model.a_array

    def lifted(*args, **kwargs):
        args = [np.asarray(x)[..., None] if np.ndim(x) else x for x in args]
        out = fn(*args, a, **kwargs)
        if isinstance(out, tuple):
            return tuple(_diag(o) for o in out)
        return _diag(out)

    return lifted


def _diag(vals):
    vals = np.asarray(vals)
    n = vals.shape[-1]
    out = np.zeros(vals.shape + (n,), dtype=vals.dtype)
    idx = np.arange(n)
    out[..., idx, idx] = vals
    return out


def potential_matrix(model: ChannelModel, r):
    return assemble_diagonal(model, v0)(r)


def jost_matrix(k, model: ChannelModel) -> np.ndarray:
    """Diagonal Jost matrix ``diag(i / (k + i a_j))``."""
    return np.diag(jost_function(k, model.a_array))


def s0_matrix(k: float, model: ChannelModel) -> np.ndarray:
    if not k > 0:
        raise DomainError("S-matrix requires k > 0")
    return np.diag(s0(k, model.a_array))


def eigenphases0(k: float, model: ChannelModel) -> np.ndarray:
    return np.sort(phase_shift(k, model.a_array))


def four_channel_model() -> ChannelModel:
    """The four-channel configuration a = (1.1, 1.5, 2.1, 2.5)."""
    return ChannelModel((1.1, 1.5, 2.1, 2.5))


def as_model(a: Sequence[float]) -> ChannelModel:
    return ChannelModel(tuple(a))
