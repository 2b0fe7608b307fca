"""Decay-exponent extraction, the Anderson integral, and polygamma support.

The overlap with the idealized jump symbol decays like N^(-2 delta^2/pi^2)
(exact exponent), while det(A) <= exp(-tr(1-A)) bounds it from above by
exp(-I_N) with I_N the Anderson integral

    I_N = sum_{j in W} sum_{k not in W} |<phi_j, e^{i g~} phi_k>|^2,

W a window of N consecutive indices.  Because the squared entries depend
on j - k only, I_N depends on the window solely through its length, and
rescaling the double sum gives

    I_N = (sin^2 delta / pi^2) * [ S(c) + S(-c)
          + N (psi_1(N+1-c) + psi_1(N+1+c)) ],      c = delta / pi,
    S(c) = sum_{t=1}^{N} t / (t - c)^2.

The infinite tails are trigamma values, evaluated by recurrence plus the
asymptotic Bernoulli series, never by truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .matrixcore import LogDet, fh_matrix, log_det

# Bernoulli numbers B_2 .. B_12 for the asymptotic expansions.
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)
_SHIFT = 16.0


def _prepare(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("polygamma requires strictly positive finite arguments")
    return arr, scalar


def digamma(x):
    """psi(x) for x > 0, relative error <= 1e-13 (recurrence + asymptotics)."""
    arr, scalar = _prepare(x)
    steps = int(np.ceil(max(0.0, _SHIFT - float(arr.min()))))
    acc = np.zeros_like(arr)
    for i in range(steps):
        shifted = arr + i
        acc += np.where(shifted < _SHIFT, 1.0 / shifted, 0.0)
    k = np.ceil(np.maximum(_SHIFT - arr, 0.0))
    y = arr + k
    inv2 = 1.0 / (y * y)
    series = np.zeros_like(y)
    power = inv2.copy()
    for n, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * n) * power
        power *= inv2
    out = np.log(y) - 0.5 / y - series - acc
    return float(out[0]) if scalar else out


def trigamma(x):
    """psi_1(x) for x > 0, relative error <= 1e-13."""
    arr, scalar = _prepare(x)
    steps = int(np.ceil(max(0.0, _SHIFT - float(arr.min()))))
    acc = np.zeros_like(arr)
    for i in range(steps):
        shifted = arr + i
        acc += np.where(shifted < _SHIFT, 1.0 / (shifted * shifted), 0.0)
    k = np.ceil(np.maximum(_SHIFT - arr, 0.0))
    y = arr + k
    inv = 1.0 / y
    inv2 = inv * inv
    series = np.zeros_like(y)
    power = inv * inv2  # 1/y^3
    for b in _BERNOULLI:
        series += b * power
        power *= inv2
    out = inv + 0.5 * inv2 + series + acc
    return float(out[0]) if scalar else out


def polygamma(order: int, x):
    """Digamma (order 0) or trigamma (order 1); other orders are out of scope."""
    if order == 0:
        return digamma(x)
    if order == 1:
        return trigamma(x)
    raise DomainError("only orders 0 and 1 are implemented")


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------

DEFAULT_N_GRID = (128, 181, 256, 362, 512, 724, 1024, 1448, 2048)


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line through (ln N, log value) pairs."""

    grid: tuple[tuple[int, float], ...]
    slope: float
    intercept: float
    max_abs_residual: float
    last_pair_slope: float


def fit_decay_exponent(series: Sequence[tuple[int, float]]) -> ExponentFit:
    """Ordinary least squares of log values against ln N.

    Also reports the two-point slope of the final pair, a cheap
    convergence diagnostic for the o(1) drift of the prefactor.
    """
    pts = [(int(n), float(v)) for n, v in series]
    if len(pts) < 4:
        raise DomainError("need at least 4 points to fit a decay exponent")
    ns = [n for n, _ in pts]
    if len(set(ns)) != len(ns):
        raise DomainError("N values must be distinct")
    pts.sort()
    x = np.log([n for n, _ in pts])
    y = np.array([v for _, v in pts])
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    last_pair = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return ExponentFit(
        grid=tuple(pts),
        slope=float(slope),
        intercept=float(intercept),
        max_abs_residual=float(np.max(np.abs(resid))),
        last_pair_slope=float(last_pair),
    )


def theorem_exponent(delta: float) -> float:
    """Exact decay exponent -2 delta^2 / pi^2 of log|overlap|^2 versus ln N."""
    return -2.0 * delta * delta / (math.pi * math.pi)


def upper_bound_exponent(delta: float) -> float:
    """Upper-bound exponent -(2/pi^2) sin^2(delta)."""
    return -2.0 * math.sin(delta) ** 2 / (math.pi * math.pi)


def fh_decay_series(delta: float, n_grid: Sequence[int] = DEFAULT_N_GRID) -> list[tuple[int, float]]:
    """(N, log |det T_N|^2) for the jump-symbol Toeplitz matrix over a grid."""
    out = []
    for n in n_grid:
        ld = log_det(fh_matrix(delta, int(n)))
        out.append((int(n), 2.0 * ld.log_magnitude))
    return out


# ---------------------------------------------------------------------------
# Anderson integral
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AndersonIntegral:
    N: int
    delta: float
    value: float


def anderson_integral(delta: float, N: int, even_n: bool = False) -> AndersonIntegral:
    """Anderson integral I_N for the jump symbol at flux angle ``delta``.

    ``even_n`` selects the window {-m, ..., m-1} (the odd-N proof window
    with the top index removed) instead of {-m, ..., m}.  Translation
    invariance of the squared matrix elements makes every window of N
    consecutive indices give the same value, so the flag does not change
    the result; it exists to mirror the two bookkeeping conventions.
    """
    if abs(delta) >= math.pi / 2:
        raise DomainError("anderson_integral requires |delta| < pi/2")
    if N < 1:
        raise DomainError("N must be >= 1")
    del even_n  # value is window-length only; see docstring
    if delta == 0.0:
        return AndersonIntegral(N=N, delta=0.0, value=0.0)
    c = delta / math.pi
    t = np.arange(1, N + 1, dtype=float)
    finite = float(np.sum(t / (t - c) ** 2) + np.sum(t / (t + c) ** 2))
    tails = N * (trigamma(N + 1 - c) + trigamma(N + 1 + c))
    value = math.sin(delta) ** 2 / math.pi**2 * (finite + tails)
    return AndersonIntegral(N=N, delta=delta, value=value)


def anderson_tail(delta: float, N: int, sign: int) -> float:
    """Closed form of the tail sum_{t > N} 1/(t + sign*delta/pi)^2 (trigamma)."""
    if sign not in (-1, 1):
        raise DomainError("sign must be +1 or -1")
    return float(trigamma(N + 1 + sign * delta / math.pi))


@dataclass(frozen=True)
class UpperBoundCheck:
    """Outcome of the det(A) <= exp(-tr(1-A)) mechanism for one (delta, N)."""

    holds: bool
    log_overlap_sq: float
    neg_anderson: float
    slack: float

    def report(self) -> str:
        rel = "<=" if self.holds else ">"
        return (
            f"log|D~|^2 = {self.log_overlap_sq:.12g} {rel} "
            f"-I = {self.neg_anderson:.12g} (slack {self.slack:g})"
        )


def upper_bound_check(flux_det: LogDet, anderson: AndersonIntegral, slack: float = 1e-8) -> UpperBoundCheck:
    """Check |D~_N|^2 <= exp(-I_N), i.e. 2 log|D~| <= -I + slack."""
    lhs = 2.0 * flux_det.log_magnitude
    rhs = -anderson.value
    return UpperBoundCheck(holds=lhs <= rhs + slack, log_overlap_sq=lhs, neg_anderson=rhs, slack=slack)
