"""Laplace-Stieltjes transform of the system lifetime.

Server ``i`` works for a time with CDF ``F_i`` and is repaired for a time with
CDF ``G_i``.  The building blocks are

    f_i(s)   = E exp(-s W_i)
    phi_i(s) = E exp(-s W_i) 1{W_i > R_j},   j = 3 - i
    psi_i(s) = E exp(-s W_i) 1{W_i <= R_j} = f_i(s) - phi_i(s)

where ``phi_i`` is the transform of a work period of server ``i`` restricted to
the event that its partner's repair finished strictly before it.  A tie counts
as a system failure, so ``phi_i`` integrates the left limit ``G_j(x-)``.
When repairs are almost always quick, ``f_i - phi_i`` is pure rounding noise
(it can even come out negative), so ``psi_i`` is then integrated on its own.

The lifetime transform is evaluated three ways (closed form, the 2x2 renewal
system for the residual lifetimes ``g12``/``g21``, and the truncated series over
failure cycles) which must agree.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

from scipy import integrate

from .distributions import DistributionSpec, Exponential, parse_distribution
from .errors import (
    FixedPointError,
    MomentDivergedError,
    NonTerminatingSystemError,
    QuadratureError,
)

__all__ = [
    "SystemModel",
    "TransformResult",
    "FixedPointSolution",
    "Kernels",
    "work_lst",
    "phi",
    "psi",
    "kernels",
    "system_lst_closed",
    "system_lst_fixed_point",
    "system_lst_scenario_sum",
    "moment",
    "continuation_probability",
]

KERNEL_RTOL = 1e-10
# tight tolerance for callers that amplify kernel noise (inversion, moments)
FINE_RTOL = 1e-13
TAIL_MASS = 1e-14
NON_TERMINATION = 1e-12
_EPS = 2.220446049250313e-16
SIX_DIGITS = 5e-6
# f - phi is trusted while it keeps all but two of the digits of f
CANCELLATION = 1e-2


@dataclass(frozen=True)
class SystemModel:
    """Two alternating servers: work times F1, F2 and repair times G1, G2."""

    work1: DistributionSpec
    work2: DistributionSpec
    repair1: DistributionSpec
    repair2: DistributionSpec
    first_server: int = 1

    def __post_init__(self):
        for name in ("work1", "work2", "repair1", "repair2"):
            if not isinstance(getattr(self, name), DistributionSpec):
                raise TypeError(f"{name} must be a DistributionSpec, got {getattr(self, name)!r}")
        if self.first_server not in (1, 2):
            raise ValueError(f"first_server must be 1 or 2, got {self.first_server!r}")

    @classmethod
    def from_literals(cls, work1: str, work2: str, repair1: str, repair2: str, first_server: int = 1):
        return cls(
            parse_distribution(work1),
            parse_distribution(work2),
            parse_distribution(repair1),
            parse_distribution(repair2),
            first_server,
        )

    def canonical(self) -> "SystemModel":
        """Equivalent model with server 1 starting (indices swapped if needed)."""
        if self.first_server == 1:
            return self
        return SystemModel(self.work2, self.work1, self.repair2, self.repair1, 1)

    def work(self, i: int) -> DistributionSpec:
        return self.work1 if i == 1 else self.work2

    def repair(self, i: int) -> DistributionSpec:
        return self.repair1 if i == 1 else self.repair2


@dataclass(frozen=True)
class TransformResult:
    value: float
    abs_error_estimate: float
    method: str


@dataclass(frozen=True)
class FixedPointSolution:
    g12: float
    g21: float
    system_lst: float
    abs_error_estimate: float = 0.0
    iterations: int = 0


class Kernels(NamedTuple):
    f1: TransformResult
    f2: TransformResult
    phi1: TransformResult
    phi2: TransformResult
    psi1: TransformResult
    psi2: TransformResult


def _check_s(s):
    if not s >= 0 or math.isinf(s):
        raise ValueError(f"transform argument must be finite and >= 0, got {s!r}")


def _check_index(i):
    if i not in (1, 2):
        raise ValueError(f"server index must be 1 or 2, got {i!r}")


def _integrate(
    dist: DistributionSpec,
    weight: Optional[Callable[[float], float]],
    weight_breaks: tuple[float, ...],
    s: float,
    rtol: float,
) -> tuple[float, float, bool]:
    """Integral of exp(-s x) weight(x) dF(x); returns (value, error, used_quadrature)."""
    atoms = dist.atoms()
    if atoms:
        total = 0.0
        for x, p in atoms:
            total += p * math.exp(-s * x) * (1.0 if weight is None else weight(x))
        return total, 4 * _EPS * total, False

    lo, hi = dist.support()
    upper = min(hi, dist.tail_point(TAIL_MASS))
    tail = 1.0 - dist.cdf(upper) if math.isinf(hi) else 0.0
    tail_error = max(tail, 0.0) * math.exp(-s * upper)

    if weight is None:
        def integrand(x):
            return math.exp(-s * x) * dist.pdf(x)
    else:
        def integrand(x):
            return math.exp(-s * x) * weight(x) * dist.pdf(x)

    # Large s concentrates the mass within ~1/s of the left end; seed panels there.
    pts = set(b for b in weight_breaks if lo < b < upper)
    if s > 0:
        pts.update(p for p in (lo + c / s for c in (1.0, 8.0, 64.0)) if lo < p < upper)
    points = sorted(pts) or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            integrand, lo, upper, points=points, epsabs=1e-15, epsrel=rtol, limit=400, full_output=1
        )
    value, abserr = out[0], out[1]
    # a fourth element (the diagnostic message) is only returned when ier > 0
    if len(out) > 3 and abserr > 100 * max(1e-15, rtol * abs(value)):
        raise QuadratureError(value, abserr + tail_error, out[3])
    return value, abserr + tail_error + 4 * _EPS * abs(value), True


def work_lst(model: SystemModel, i: int, s: float, *, rtol: float = KERNEL_RTOL,
             force_quadrature: bool = False) -> TransformResult:
    """f_i(s) = E exp(-s W_i)."""
    _check_s(s)
    _check_index(i)
    dist = model.canonical().work(i)
    closed = None if force_quadrature else dist.closed_lst(s)
    if closed is not None:
        return TransformResult(closed, 4 * _EPS * closed, "closed")
    value, err, used_quad = _integrate(dist, None, (), s, rtol)
    return TransformResult(value, err, "quadrature" if used_quad else "closed")


def phi(model: SystemModel, i: int, s: float, *, rtol: float = KERNEL_RTOL,
        force_quadrature: bool = False) -> TransformResult:
    """phi_i(s) = E exp(-s W_i) 1{W_i > R_j} with j the other server."""
    _check_s(s)
    _check_index(i)
    model = model.canonical()
    work, repair = model.work(i), model.repair(3 - i)
    if isinstance(work, Exponential) and not force_quadrature:
        # integrate by parts: lam * int exp(-(lam+s)x) G(x) dx = lam/(lam+s) * LST_G(lam+s)
        lam = work.rate
        g = repair.closed_lst(lam + s)
        if g is not None:
            value = lam / (lam + s) * g
            return TransformResult(value, 8 * _EPS * value, "closed")
    value, err, used_quad = _integrate(work, repair.cdf_left, repair.breakpoints(), s, rtol)
    return TransformResult(value, err, "quadrature" if used_quad else "closed")


def psi(model: SystemModel, i: int, s: float, *, rtol: float = KERNEL_RTOL,
        force_quadrature: bool = False) -> TransformResult:
    """psi_i(s) = E exp(-s W_i) 1{W_i <= R_j}: server i fails with its partner still in repair."""
    _check_s(s)
    _check_index(i)
    model = model.canonical()
    work, repair = model.work(i), model.repair(3 - i)
    if isinstance(work, Exponential) and not force_quadrature:
        lam = work.rate
        if isinstance(repair, Exponential):
            value = lam / (lam + s + repair.rate)
            return TransformResult(value, 4 * _EPS * value, "closed")
        g = repair.closed_lst(lam + s)
        if g is not None:
            value = lam / (lam + s) * (1.0 - g)
            return TransformResult(value, 8 * _EPS * lam / (lam + s), "closed")
    value, err, used_quad = _integrate(work, repair.sf_left, repair.breakpoints(), s, rtol)
    return TransformResult(value, err, "quadrature" if used_quad else "closed")


def _failure_kernel(model, i, s, f, ph, kw):
    gap = f.value - ph.value
    if gap >= CANCELLATION * f.value and gap > 0:
        return TransformResult(gap, f.abs_error_estimate + ph.abs_error_estimate + _EPS * f.value,
                               "difference")
    return psi(model, i, s, **kw)


@lru_cache(maxsize=8192)
def _kernels_cached(model, s, rtol, force_quadrature):
    kw = dict(rtol=rtol, force_quadrature=force_quadrature)
    f1, f2 = work_lst(model, 1, s, **kw), work_lst(model, 2, s, **kw)
    p1, p2 = phi(model, 1, s, **kw), phi(model, 2, s, **kw)
    return Kernels(f1, f2, p1, p2,
                   _failure_kernel(model, 1, s, f1, p1, kw),
                   _failure_kernel(model, 2, s, f2, p2, kw))


def kernels(model: SystemModel, s: float, *, rtol: float = KERNEL_RTOL,
            force_quadrature: bool = False) -> Kernels:
    """All six kernels at ``s`` (memoised; inputs are immutable)."""
    _check_s(s)
    return _kernels_cached(model.canonical(), float(s), rtol, force_quadrature)


def continuation_probability(model: SystemModel) -> float:
    """phi1(0) * phi2(0): probability that two consecutive hand-overs both succeed."""
    k = kernels(model, 0.0)
    return k.phi1.value * k.phi2.value


def _unit(x: float) -> float:
    # rounding can push a probability-like value an ulp outside [0, 1]
    return min(1.0, max(0.0, x))


def _denominator(k: Kernels, s: float) -> float:
    r = k.phi1.value * k.phi2.value
    if (s == 0 and r >= 1.0 - NON_TERMINATION) or r >= 1.0:
        raise NonTerminatingSystemError(r)
    return 1.0 - r


def system_lst_closed(model: SystemModel, s: float, *, rtol: float = KERNEL_RTOL,
                      force_quadrature: bool = False) -> TransformResult:
    """E exp(-s tau) = f1 (psi2 + phi2 psi1) / (1 - phi1 phi2), with psi_i = f_i - phi_i."""
    k = kernels(model, s, rtol=rtol, force_quadrature=force_quadrature)
    f1, p1, p2, q1, q2 = k.f1.value, k.phi1.value, k.phi2.value, k.psi1.value, k.psi2.value
    d = _denominator(k, s)
    num = q2 + p2 * q1
    value = f1 * num / d
    # first-order propagation of the kernel errors
    sens = (
        abs(num / d) * k.f1.abs_error_estimate
        + abs(f1 * num * p2 / d**2) * k.phi1.abs_error_estimate
        + abs(f1 * q1 / d + f1 * num * p1 / d**2) * k.phi2.abs_error_estimate
        + abs(f1 * p2 / d) * k.psi1.abs_error_estimate
        + abs(f1 / d) * k.psi2.abs_error_estimate
    )
    err = sens + 8 * _EPS * abs(value) / d
    return TransformResult(_unit(value), err, "closed")


def _iterate_affine(a: tuple[float, float], b: tuple[float, float], tol: float = 1e-14,
                    max_doublings: int = 200) -> tuple[float, float, int]:
    """Iterate g <- a + B g from g = 0 with B = [[0, b1], [b2, 0]].

    Returns the iterate T^m(0) at which successive iterates differ by < tol.
    The step count m doubles each round (T^{2m} = T^m o T^m via squaring of
    the affine map), so slowly contracting systems stay cheap.
    """
    # one plain sweep first
    m = 1
    c = [a[0], a[1]]
    M = [[0.0, b[0]], [b[1], 0.0]]
    prev = [0.0, 0.0]
    for _ in range(max_doublings):
        if abs(c[0] - prev[0]) < tol and abs(c[1] - prev[1]) < tol:
            return c[0], c[1], m
        prev = c
        # (M, c) o (M, c) = (M^2, c + M c)
        c = [
            c[0] + M[0][0] * c[0] + M[0][1] * c[1],
            c[1] + M[1][0] * c[0] + M[1][1] * c[1],
        ]
        M = [
            [M[0][0] * M[0][0] + M[0][1] * M[1][0], M[0][0] * M[0][1] + M[0][1] * M[1][1]],
            [M[1][0] * M[0][0] + M[1][1] * M[1][0], M[1][0] * M[0][1] + M[1][1] * M[1][1]],
        ]
        m *= 2
    raise FixedPointError(f"contraction did not settle after 2^{max_doublings} steps")


def system_lst_fixed_point(model: SystemModel, s: float, *, rtol: float = KERNEL_RTOL,
                           force_quadrature: bool = False) -> FixedPointSolution:
    """Solve g12 = psi1 + phi1 g21, g21 = psi2 + phi2 g12.

    Solved by elimination and by iterating the contraction; the two answers
    must agree.  The lifetime transform is f1 * g21.
    """
    k = kernels(model, s, rtol=rtol, force_quadrature=force_quadrature)
    f1, p1, p2 = k.f1.value, k.phi1.value, k.phi2.value
    d = _denominator(k, s)
    a1, a2 = k.psi1.value, k.psi2.value

    g12 = (a1 + p1 * a2) / d
    g21 = (a2 + p2 * a1) / d

    it12, it21, steps = _iterate_affine((a1, a2), (p1, p2))
    # residual after the stopping rule plus accumulated rounding of the squarings
    allowed = 1e-10 + 1e-14 / d
    if abs(it12 - g12) > allowed or abs(it21 - g21) > allowed:
        raise FixedPointError(
            f"elimination ({g12!r}, {g21!r}) and iteration ({it12!r}, {it21!r}) disagree at s={s!r}"
        )
    value = _unit(f1 * g21)
    err = system_lst_closed(model, s, rtol=rtol, force_quadrature=force_quadrature).abs_error_estimate
    return FixedPointSolution(g12, g21, value, err, steps)


def system_lst_scenario_sum(model: SystemModel, s: float, max_cycles: int, *,
                            rtol: float = KERNEL_RTOL,
                            force_quadrature: bool = False) -> TransformResult:
    """Partial sum over failure cycles k = 1..K of the scenario series.

    Cycle ``k`` contributes the two ways the system can die during it (server
    1 caught unrepaired when server 2 fails, or the reverse on the next hand
    over), each weighted by (phi1 phi2)^(k-1).  The error estimate bounds the
    omitted geometric tail.
    """
    if max_cycles < 1:
        raise ValueError(f"max_cycles must be >= 1, got {max_cycles!r}")
    k = kernels(model, s, rtol=rtol, force_quadrature=force_quadrature)
    f1, p1, p2 = k.f1.value, k.phi1.value, k.phi2.value
    dies_on_server2 = f1 * k.psi2.value
    dies_on_server1 = f1 * p2 * k.psi1.value
    ratio = p1 * p2

    total = 0.0
    weight = 1.0
    for _ in range(max_cycles):
        total += dies_on_server2 * weight + dies_on_server1 * weight
        weight *= ratio

    per_cycle = dies_on_server2 + dies_on_server1
    if ratio < 1.0:
        tail = weight / (1.0 - ratio) * per_cycle
        rounding = 4 * _EPS * max_cycles * per_cycle / (1.0 - ratio)
    else:
        tail = math.inf if per_cycle > 0 else 0.0
        rounding = 0.0
    return TransformResult(_unit(total), tail + rounding, "scenario_sum")


def _forward_derivative(fn, n: int, h: float) -> float:
    acc = 0.0
    for j in range(n + 1):
        acc += (-1) ** (n - j) * math.comb(n, j) * fn(j * h)
    return acc / h**n


def moment(model: SystemModel, n: int, *, method: str = "richardson", rtol: float = FINE_RTOL,
           h0: float = 1e-2, max_levels: int = 12) -> float:
    """E tau^n = (-1)^n L^(n)(0).

    ``method="richardson"`` differentiates the closed-form transform by
    one-sided differences on s >= 0 (the transform need not exist for s < 0),
    extrapolated over the steps h0, h0/2, ... and accepted once stable to six
    significant digits.  Rounding noise limits it to roughly 1e-5 relative
    accuracy for n = 4.

    ``method="series"`` propagates truncated Taylor series of the four kernels
    (their coefficients are partial moments of the work times) through the
    closed form, which is exact up to quadrature error.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError(f"moment order must be 1..4, got {n!r}")
    model = model.canonical()
    k0 = kernels(model, 0.0, rtol=rtol)
    _denominator(k0, 0.0)
    if method == "series":
        return _moment_series(model, n, rtol)
    if method != "richardson":
        raise ValueError(f"unknown moment method {method!r}")

    def lst(s):
        return system_lst_closed(model, s, rtol=rtol).value

    sign = -1.0 if n % 2 else 1.0
    tableau = [[sign * _forward_derivative(lst, n, h0)]]
    best, best_err = tableau[0][0], math.inf
    h = h0
    for i in range(1, max_levels):
        h /= 2.0
        row = [sign * _forward_derivative(lst, n, h)]
        fac = 2.0
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - tableau[i - 1][j - 1]) / (fac - 1.0))
            fac *= 2.0
            err = max(abs(row[j] - row[j - 1]), abs(row[j] - tableau[i - 1][j - 1]))
            if err <= best_err:
                best, best_err = row[j], err
        tableau.append(row)
        # rounding noise has taken over once the diagonal starts growing again
        if abs(row[i] - tableau[i - 1][i - 1]) >= 2.0 * best_err:
            break
    if not math.isfinite(best) or best_err > SIX_DIGITS * max(abs(best), 1e-300):
        raise MomentDivergedError(
            f"moment {n} did not stabilise to 6 digits (best {best!r} +/- {best_err!r})"
        )
    return best


def _partial_moment(dist: DistributionSpec, k: int, weight, weight_breaks, rtol: float) -> float:
    """E[X^k weight(X)]."""
    atoms = dist.atoms()
    if atoms:
        return sum(p * x**k * (1.0 if weight is None else weight(x)) for x, p in atoms)
    lo, hi = dist.support()
    upper = min(hi, dist.tail_point(1e-30))

    def integrand(x):
        w = 1.0 if weight is None else weight(x)
        return x**k * w * dist.pdf(x)

    points = sorted(b for b in weight_breaks if lo < b < upper) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(integrand, lo, upper, points=points, epsabs=0.0, epsrel=rtol,
                             limit=400, full_output=1)
    if len(out) > 3 and out[1] > 100 * rtol * abs(out[0]):
        raise QuadratureError(out[0], out[1], out[3])
    return out[0]


def _series_mul(a, b):
    n = len(a)
    return [math.fsum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n)]


def _series_div(a, b):
    out = []
    for k in range(len(a)):
        out.append((a[k] - math.fsum(out[j] * b[k - j] for j in range(k))) / b[0])
    return out


def _moment_series(model: SystemModel, n: int, rtol: float) -> float:
    def taylor(dist, weight=None, breaks=()):
        return [(-1) ** k * _partial_moment(dist, k, weight, breaks, rtol) / math.factorial(k)
                for k in range(n + 1)]

    f1 = taylor(model.work1)
    p1 = taylor(model.work1, model.repair2.cdf_left, model.repair2.breakpoints())
    p2 = taylor(model.work2, model.repair1.cdf_left, model.repair1.breakpoints())
    q1 = taylor(model.work1, model.repair2.sf_left, model.repair2.breakpoints())
    q2 = taylor(model.work2, model.repair1.sf_left, model.repair1.breakpoints())
    one = [1.0] + [0.0] * n
    num = [a + b for a, b in zip(q2, _series_mul(p2, q1))]
    den = [a - b for a, b in zip(one, _series_mul(p1, p2))]
    lst = _series_div(_series_mul(f1, num), den)
    return (-1) ** n * math.factorial(n) * lst[n]
