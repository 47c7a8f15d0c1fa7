"""
Numeric kernels for BeamPlan

Error function, bracketed root finding, adaptive quadrature and the
damped least-squares Gaussian fit. Everything here is pure and reentrant.
"""

import logging
import math
from typing import Callable, Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from BeamPlan.exceptions import (
    BracketError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
)
from BeamPlan.models import GaussianFit, PasSamples

logger = logging.getLogger(__name__)

RealFunction = Callable[[float], float]

_EPS = np.finfo(float).eps
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SQRT_PI = math.sqrt(math.pi)

# |x| below this uses the power series, above it the erfc continued fraction
ERF_SERIES_LIMIT = 3.0
# erfc(6) ~ 2e-17, below double resolution of 1
ERF_SATURATION = 6.0


class Bracket(NamedTuple):
    lo: float
    hi: float


# ---------------------------------------------------------------------------
# Error function
# ---------------------------------------------------------------------------

def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_n (2x^2)^n x / (1*3*...*(2n+1)); all terms positive
    two_x2 = 2.0 * x * x
    term = x
    total = x
    n = 0
    while term > _EPS * total * 1e-2:
        n += 1
        term *= two_x2 / (2 * n + 1)
        total += term
        if n > 500:
            break
    return _TWO_OVER_SQRT_PI * math.exp(-x * x) * total


def _erfc_continued_fraction(x: float) -> float:
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz
    tiny = 1e-300
    f = x
    c = f
    d = 0.0
    for k in range(1, 500):
        a = 0.5 * k
        d = x + a * d
        if d == 0.0:
            d = tiny
        c = x + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / (_SQRT_PI * f)


def erf(x: float) -> float:
    """Gaussian error function, absolute error below 1e-12"""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f'erf needs a finite argument, got {x}')
    if x < 0.0:
        return -erf(-x)
    if x == 0.0:
        return 0.0
    if x < ERF_SERIES_LIMIT:
        return min(1.0, _erf_series(x))
    if x >= ERF_SATURATION:
        return 1.0
    return 1.0 - _erfc_continued_fraction(x)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root(f: RealFunction, bracket: Union[Bracket, Tuple[float, float]], tol: float = 1e-12,
              max_iter: int = 200) -> float:
    """Brent's method: inverse quadratic / secant steps guarded by bisection

    Returns r in [lo, hi] with |f(r)| <= tol or a final bracket no wider than tol.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f'bracket must satisfy lo < hi, got [{lo}, {hi}]')
    if tol <= 0:
        raise DomainError('root tolerance must be > 0')

    a, b = lo, hi
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f'no sign change on [{lo}, {hi}]: f(lo)={fa:.6g}, f(hi)={fb:.6g}')

    c, fc = b, fb
    d = e = b - a
    for iteration in range(max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0 or abs(fb) <= tol:
            logger.debug('find_root converged after %d iterations: r=%.15g f(r)=%.3g',
                         iteration, b, fb)
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)

    raise ConvergenceError(f'find_root did not converge in {max_iter} iterations', best=b)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

MAX_INTERVALS = 1_000_000
_INITIAL_PANELS = 16


def integrate(f: RealFunction, a: float, b: float, tol: float = 1e-10,
              max_intervals: int = MAX_INTERVALS) -> float:
    """Adaptive Simpson quadrature with Richardson correction

    Targets |error| <= tol * max(1, |result|). The budget counts interval
    evaluations; exhausting it raises ConvergenceError.
    """
    a, b = float(a), float(b)
    if a > b:
        raise DomainError(f'integration limits must satisfy a <= b, got [{a}, {b}]')
    if a == b:
        return 0.0

    width = (b - a) / _INITIAL_PANELS
    panels = []
    for i in range(_INITIAL_PANELS):
        lo = a + i * width
        hi = b if i == _INITIAL_PANELS - 1 else lo + width
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        panels.append((lo, hi, flo, fmid, fhi, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)))

    estimate = math.fsum(p[5] for p in panels)
    abs_tol = tol * max(1.0, abs(estimate))
    span = b - a

    pieces: List[float] = []
    stack = panels[::-1]
    processed = 0
    while stack:
        lo, hi, flo, fmid, fhi, whole = stack.pop()
        processed += 1
        if processed > max_intervals:
            raise ConvergenceError(
                f'integrate exhausted its budget of {max_intervals} intervals on [{a}, {b}]',
                best=math.fsum(pieces) + math.fsum(s[5] for s in stack) + whole)
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - whole
        local_tol = abs_tol * (hi - lo) / span
        if abs(delta) <= 15.0 * local_tol or lm <= lo or rm >= hi:
            pieces.append(left + right + delta / 15.0)
        else:
            stack.append((mid, hi, fmid, frm, fhi, right))
            stack.append((lo, mid, flo, flm, fmid, left))

    return math.fsum(pieces)


# ---------------------------------------------------------------------------
# Gaussian fitting
# ---------------------------------------------------------------------------

FIT_MAX_ITER = 200
FIT_REL_TOL = 1e-10
_LAMBDA_MAX = 1e16


def _as_sample_array(samples) -> np.ndarray:
    if isinstance(samples, PasSamples):
        pairs = samples.as_pairs()
    else:
        pairs = list(samples)
    data = np.asarray(pairs, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DegenerateInputError('samples must be (angle_deg, density) pairs')
    return data


def _gaussian_model(params: np.ndarray, t: np.ndarray):
    amp, center, width = params
    z = (t - center) / width
    e = np.exp(-z * z)
    model = amp * e
    jac = np.empty((t.size, 3))
    jac[:, 0] = e
    jac[:, 1] = model * 2.0 * z / width
    jac[:, 2] = model * 2.0 * z * z / width
    return model, jac


def moment_guess(samples) -> GaussianFit:
    """Starting point: density-weighted mean, sqrt(2) * weighted std, peak density"""
    data = _as_sample_array(samples)
    phi, dens = data[:, 0], data[:, 1]
    weights = dens / dens.sum()
    center = float(np.sum(weights * phi))
    std = float(np.sqrt(np.sum(weights * (phi - center) ** 2)))
    if std <= 0:
        raise DegenerateInputError('density mass sits at a single angle; width is not identifiable')
    return GaussianFit(u=float(dens.max()), x_deg=center, v_deg=std * math.sqrt(2.0))


def fit_gaussian(samples: Union[PasSamples, Iterable[Sequence[float]]],
                 max_iter: int = FIT_MAX_ITER, rel_tol: float = FIT_REL_TOL) -> GaussianFit:
    """Least-squares fit of u*exp(-(phi-x)^2/v^2) to (angle, density) samples

    Levenberg style additive damping on the normal equations, started from
    the sample moments. The problem is solved in normalized units (peak
    density 1, angles centered on the weighted mean).
    """
    data = _as_sample_array(samples)
    if data.shape[0] < 5:
        raise DegenerateInputError(f'need at least 5 samples, got {data.shape[0]}')
    if not np.all(np.isfinite(data)):
        raise DegenerateInputError('samples must be finite')
    phi, dens = data[:, 0], data[:, 1]
    if np.any(dens < 0):
        raise DomainError('densities must be non-negative')
    if not np.any(dens > 0):
        raise DegenerateInputError('all densities are zero')
    if np.count_nonzero(dens) < 3:
        raise DegenerateInputError(
            f'only {np.count_nonzero(dens)} non-zero densities; a Gaussian needs at least 3')

    guess = moment_guess(data)
    scale = guess.u
    origin = guess.x_deg
    t = phi - origin
    y = dens / scale

    params = np.array([1.0, 0.0, guess.v_deg])
    model, jac = _gaussian_model(params, t)
    resid = model - y
    cost = float(resid @ resid)
    lam = 1e-3
    eye = np.eye(3)

    def _result(p: np.ndarray) -> GaussianFit:
        return GaussianFit(u=float(p[0] * scale), x_deg=float(origin + p[1]), v_deg=float(abs(p[2])))

    for iteration in range(1, max_iter + 1):
        grad = jac.T @ resid
        normal = jac.T @ jac
        step = np.zeros(3)
        accepted = False
        while lam <= _LAMBDA_MAX:
            try:
                step = np.linalg.solve(normal + lam * eye, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + step
            if trial[0] <= 0 or trial[2] <= 0:
                lam *= 10.0
                continue
            trial_model, trial_jac = _gaussian_model(trial, t)
            trial_resid = trial_model - y
            trial_cost = float(trial_resid @ trial_resid)
            if trial_cost <= cost:
                params, model, jac, resid, cost = trial, trial_model, trial_jac, trial_resid, trial_cost
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                break
            lam *= 10.0

        change = float(np.linalg.norm(step) / max(np.linalg.norm(params), 1e-300))
        if not accepted or change < rel_tol:
            logger.debug('fit_gaussian converged after %d iterations (cost=%.3g, lambda=%.1g)',
                         iteration, cost * scale * scale, lam)
            return _result(params)

    raise ConvergenceError(f'fit_gaussian did not converge in {max_iter} iterations',
                           best=_result(params))
