"""Nonnegative work/repair time distributions.

Each family is an immutable dataclass.  The module-level functions
(:func:`cdf`, :func:`cdf_left`, :func:`sample`, :func:`closed_lst`) are the
public surface; the methods they call are shared with the transform and
simulation code.

Distributions are written in configs and on the command line with the literal
syntax ``exp(rate)``, ``weibull(shape,scale)``, ``gamma(shape,rate)``,
``uniform(lo,hi)`` and ``det(value)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from typing import ClassVar, Optional, Protocol

import numpy as np
from scipy import special

__all__ = [
    "DistributionSpec",
    "Exponential",
    "Weibull",
    "Gamma",
    "Uniform",
    "Deterministic",
    "cdf",
    "cdf_left",
    "sample",
    "sample_array",
    "closed_lst",
    "parse_distribution",
]


class UniformSource(Protocol):
    def random(self) -> float: ...


def _check_finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class DistributionSpec:
    """Base class; concrete families below."""

    kind: ClassVar[str] = ""
    # kernel code used by the simulation core
    code: ClassVar[int] = -1

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf_left(self, x: float) -> float:
        return self.cdf(x)

    def sf_left(self, x: float) -> float:
        """P(X >= x), computed without cancellation in the upper tail."""
        return 1.0 - self.cdf_left(x)

    def pdf(self, x: float) -> float:
        """Density of the absolutely continuous part."""
        raise NotImplementedError

    def sample(self, rng: UniformSource) -> float:
        raise NotImplementedError

    def closed_lst(self, s: float) -> Optional[float]:
        return None

    def mean(self) -> float:
        raise NotImplementedError

    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ()

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def tail_point(self, eps: float) -> float:
        """Smallest x with P(X > x) <= eps."""
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the CDF has a jump or a kink."""
        return ()

    def params(self) -> tuple[float, float]:
        raise NotImplementedError

    def __str__(self) -> str:
        args = ",".join(repr(float(p)) for p in self._literal_args())
        return f"{self.kind}({args})"

    def _literal_args(self) -> tuple[float, ...]:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float

    kind: ClassVar[str] = "exp"
    code: ClassVar[int] = 0

    def __post_init__(self):
        _check_finite("rate", self.rate)
        if self.rate <= 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate!r}")

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return -math.expm1(-self.rate * x)

    def sf_left(self, x):
        return 1.0 if x <= 0 else math.exp(-self.rate * x)

    def pdf(self, x):
        if x < 0:
            return 0.0
        return self.rate * math.exp(-self.rate * x)

    def sample(self, rng):
        return -math.log1p(-rng.random()) / self.rate

    def closed_lst(self, s):
        return self.rate / (self.rate + s)

    def mean(self):
        return 1.0 / self.rate

    def tail_point(self, eps):
        return -math.log(eps) / self.rate

    def params(self):
        return (self.rate, 0.0)

    def _literal_args(self):
        return (self.rate,)


@dataclass(frozen=True)
class Weibull(DistributionSpec):
    shape: float
    scale: float

    kind: ClassVar[str] = "weibull"
    code: ClassVar[int] = 1

    def __post_init__(self):
        _check_finite("shape", self.shape)
        _check_finite("scale", self.scale)
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError(
                f"weibull shape and scale must be > 0, got ({self.shape!r}, {self.scale!r})"
            )

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return -math.expm1(-((x / self.scale) ** self.shape))

    def sf_left(self, x):
        return 1.0 if x <= 0 else math.exp(-((x / self.scale) ** self.shape))

    def pdf(self, x):
        if x <= 0:
            return 0.0
        z = x / self.scale
        return self.shape / self.scale * z ** (self.shape - 1.0) * math.exp(-(z**self.shape))

    def sample(self, rng):
        return self.scale * (-math.log1p(-rng.random())) ** (1.0 / self.shape)

    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def tail_point(self, eps):
        return self.scale * (-math.log(eps)) ** (1.0 / self.shape)

    def params(self):
        return (self.shape, self.scale)

    def _literal_args(self):
        return (self.shape, self.scale)


@dataclass(frozen=True)
class Gamma(DistributionSpec):
    shape: float
    rate: float

    kind: ClassVar[str] = "gamma"
    code: ClassVar[int] = 2

    def __post_init__(self):
        _check_finite("shape", self.shape)
        _check_finite("rate", self.rate)
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError(
                f"gamma shape and rate must be > 0, got ({self.shape!r}, {self.rate!r})"
            )

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return float(special.gammainc(self.shape, self.rate * x))

    def sf_left(self, x):
        return 1.0 if x <= 0 else float(special.gammaincc(self.shape, self.rate * x))

    def pdf(self, x):
        if x <= 0:
            return 0.0
        a, r = self.shape, self.rate
        return math.exp(a * math.log(r) + (a - 1.0) * math.log(x) - r * x - math.lgamma(a))

    def sample(self, rng):
        # Marsaglia-Tsang; shape < 1 boosted by U^(1/shape).  Normals come from
        # Box-Muller on the same uniform source so the compiled core can mirror
        # the draw sequence exactly.
        a = self.shape
        boost = 1.0
        if a < 1.0:
            boost = rng.random() ** (1.0 / a)
            a = a + 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            u1 = rng.random()
            u2 = rng.random()
            z = math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)
            v = 1.0 + c * z
            if v <= 0.0:
                continue
            v = v * v * v
            u = rng.random()
            if math.log1p(-u) < 0.5 * z * z + d - d * v + d * math.log(v):
                return boost * d * v / self.rate

    def closed_lst(self, s):
        return (self.rate / (self.rate + s)) ** self.shape

    def mean(self):
        return self.shape / self.rate

    def tail_point(self, eps):
        return float(special.gammainccinv(self.shape, eps)) / self.rate

    def params(self):
        return (self.shape, self.rate)

    def _literal_args(self):
        return (self.shape, self.rate)


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    lo: float
    hi: float

    kind: ClassVar[str] = "uniform"
    code: ClassVar[int] = 3

    def __post_init__(self):
        _check_finite("lo", self.lo)
        _check_finite("hi", self.hi)
        if self.lo < 0 or self.hi <= self.lo:
            raise ValueError(f"uniform needs 0 <= lo < hi, got ({self.lo!r}, {self.hi!r})")

    def cdf(self, x):
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return 1.0
        return (x - self.lo) / (self.hi - self.lo)

    def sf_left(self, x):
        if x <= self.lo:
            return 1.0
        if x >= self.hi:
            return 0.0
        return (self.hi - x) / (self.hi - self.lo)

    def pdf(self, x):
        if self.lo <= x <= self.hi:
            return 1.0 / (self.hi - self.lo)
        return 0.0

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * rng.random()

    def closed_lst(self, s):
        width = self.hi - self.lo
        if s * width < 1e-300:
            return math.exp(-s * self.lo)
        return math.exp(-s * self.lo) * -math.expm1(-s * width) / (s * width)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def support(self):
        return (self.lo, self.hi)

    def tail_point(self, eps):
        return self.hi

    def breakpoints(self):
        return (self.lo, self.hi)

    def params(self):
        return (self.lo, self.hi)

    def _literal_args(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    value: float

    kind: ClassVar[str] = "det"
    code: ClassVar[int] = 4

    def __post_init__(self):
        _check_finite("value", self.value)
        if self.value < 0:
            raise ValueError(f"deterministic value must be >= 0, got {self.value!r}")

    def cdf(self, x):
        return 1.0 if x >= self.value else 0.0

    def cdf_left(self, x):
        return 1.0 if x > self.value else 0.0

    def sf_left(self, x):
        return 1.0 if x <= self.value else 0.0

    def pdf(self, x):
        return 0.0

    def sample(self, rng):
        return self.value

    def closed_lst(self, s):
        return math.exp(-s * self.value)

    def mean(self):
        return self.value

    def atoms(self):
        return ((self.value, 1.0),)

    def support(self):
        return (self.value, self.value)

    def tail_point(self, eps):
        return self.value

    def breakpoints(self):
        return (self.value,)

    def params(self):
        return (self.value, 0.0)

    def _literal_args(self):
        return (self.value,)


def cdf(dist: DistributionSpec, x: float) -> float:
    """P(X <= x)."""
    return dist.cdf(x)


def cdf_left(dist: DistributionSpec, x: float) -> float:
    """P(X < x), the left limit of the CDF."""
    return dist.cdf_left(x)


def sample(dist: DistributionSpec, rng: UniformSource) -> float:
    """One draw from ``dist``.

    ``rng`` is anything with a ``random()`` method returning uniforms on
    [0, 1): a :class:`numpy.random.Generator` or a
    :class:`duo_standby.rng.CounterStream`.
    """
    return dist.sample(rng)


def sample_array(dist: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorised draws from a numpy Generator (not tied to the scalar draw order)."""
    if isinstance(dist, Gamma):
        return rng.gamma(dist.shape, 1.0 / dist.rate, size)
    if isinstance(dist, Deterministic):
        return np.full(size, dist.value)
    u = rng.random(size)
    if isinstance(dist, Exponential):
        return -np.log1p(-u) / dist.rate
    if isinstance(dist, Weibull):
        return dist.scale * (-np.log1p(-u)) ** (1.0 / dist.shape)
    if isinstance(dist, Uniform):
        return dist.lo + (dist.hi - dist.lo) * u
    raise TypeError(f"unsupported distribution {dist!r}")


def closed_lst(dist: DistributionSpec, s: float) -> Optional[float]:
    """E exp(-s X) in closed form, or None when no elementary form exists."""
    if s < 0:
        raise ValueError(f"transform argument must be >= 0, got {s!r}")
    return dist.closed_lst(s)


_FAMILIES = {cls.kind: cls for cls in (Exponential, Weibull, Gamma, Uniform, Deterministic)}
_LITERAL = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def parse_distribution(text: str) -> DistributionSpec:
    """Parse a literal like ``"weibull(2, 1.5)"``.

    Raises ValueError with a readable message on malformed literals or
    parameters outside the family's domain.
    """
    m = _LITERAL.match(text)
    if m is None:
        raise ValueError(f"malformed distribution literal {text!r}")
    name, body = m.groups()
    cls = _FAMILIES.get(name)
    if cls is None:
        known = ", ".join(sorted(_FAMILIES))
        raise ValueError(f"unknown distribution {name!r} (expected one of {known})")
    parts = [p.strip() for p in body.split(",")] if body.strip() else []
    try:
        args = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"non-numeric parameter in {text!r}") from None
    nargs = len(fields(cls))
    if len(args) != nargs:
        raise ValueError(f"{name} takes {nargs} parameter(s), got {len(args)} in {text!r}")
    return cls(*args)
