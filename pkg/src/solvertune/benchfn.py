"""Benchmark test functions with known optima.

The pool follows the community-standard (CEC-style) definitions and domain
boxes; every function is non-negative on its box with global minimum 0 at
the documented optimum. All evaluators are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatchError, InvalidRangeError, OutOfDomainError
from .searchspace import Continuous, ParamSpec, SearchSpace

SCHWEFEL_OPT = 420.968746
POLYFIT_GRID_POINTS = 64


def _sphere(x):
    return float(np.sum(x * x))


def _quadratic(x):
    # Ill-conditioned diagonal quadratic: sum_i i * x_i^2 (1-based i).
    return float(np.sum(np.arange(1, len(x) + 1) * x * x))


def _rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def _rastrigin(x):
    return float(10.0 * len(x) + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def _ackley(x):
    d = len(x)
    return float(-20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x) / d))
                 - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d) + 20.0 + math.e)


def _griewank(x):
    i = np.arange(1, len(x) + 1)
    return float(1.0 + np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))))


def _schaffer_f6(x):
    ss = float(x[0] ** 2 + x[1] ** 2)
    return 0.5 + (math.sin(math.sqrt(ss)) ** 2 - 0.5) / (1.0 + 0.001 * ss) ** 2


def _hgbat(x):
    # Optimum 0 at x = -1: the tail terms collapse to 0.5*sum((x_i+1)^2)/d.
    d = len(x)
    s2 = float(np.sum(x * x))
    s1 = float(np.sum(x))
    return math.sqrt(abs(s2 ** 2 - s1 ** 2)) + (0.5 * s2 + s1) / d + 0.5


def _schwefel(x):
    return float(418.9829 * len(x) - np.sum(x * np.sin(np.sqrt(np.abs(x)))))


_WEIER_A, _WEIER_B, _WEIER_KMAX = 0.5, 3, 20
_WEIER_AK = _WEIER_A ** np.arange(_WEIER_KMAX + 1)
_WEIER_BK = float(np.pi) * _WEIER_B ** np.arange(_WEIER_KMAX + 1)
_WEIER_SHIFT = float(np.sum(_WEIER_AK * np.cos(_WEIER_BK)))


def _weierstrass(x):
    total = 0.0
    for xi in x:
        total += float(np.sum(_WEIER_AK * np.cos(2.0 * _WEIER_BK * (xi + 0.5))))
    return total - len(x) * _WEIER_SHIFT


@dataclass(frozen=True)
class _FnDef:
    fn: Callable[[np.ndarray], float]
    box: tuple[float, float]
    optimum: Callable[[int], np.ndarray]
    min_dim: int = 1
    fixed_dim: Optional[int] = None
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None


def _grad_sphere(x):
    return 2.0 * x


def _grad_quadratic(x):
    return 2.0 * np.arange(1, len(x) + 1) * x


def _grad_rosenbrock(x):
    g = np.zeros_like(x)
    g[:-1] += -400.0 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2.0 * (1.0 - x[:-1])
    g[1:] += 200.0 * (x[1:] - x[:-1] ** 2)
    return g


_FUNCTIONS: dict[str, _FnDef] = {
    "sphere": _FnDef(_sphere, (-100.0, 100.0), lambda d: np.zeros(d), gradient=_grad_sphere),
    "quadratic": _FnDef(_quadratic, (-100.0, 100.0), lambda d: np.zeros(d), gradient=_grad_quadratic),
    "rosenbrock": _FnDef(_rosenbrock, (-30.0, 30.0), lambda d: np.ones(d),
                         min_dim=2, gradient=_grad_rosenbrock),
    "rastrigin": _FnDef(_rastrigin, (-5.12, 5.12), lambda d: np.zeros(d)),
    "ackley": _FnDef(_ackley, (-32.768, 32.768), lambda d: np.zeros(d)),
    "griewank": _FnDef(_griewank, (-600.0, 600.0), lambda d: np.zeros(d)),
    "schaffer_f6": _FnDef(_schaffer_f6, (-100.0, 100.0), lambda d: np.zeros(d), fixed_dim=2),
    "hgbat": _FnDef(_hgbat, (-100.0, 100.0), lambda d: -np.ones(d)),
    "schwefel": _FnDef(_schwefel, (-500.0, 500.0), lambda d: np.full(d, SCHWEFEL_OPT)),
    "weierstrass": _FnDef(_weierstrass, (-0.5, 0.5), lambda d: np.zeros(d)),
}

FUNCTION_NAMES = tuple(sorted(_FUNCTIONS)) + ("polyfit",)


@dataclass(frozen=True)
class PolyfitData:
    """Planted polynomial-fitting instance (noise-free, SSE objective)."""

    coeffs: tuple[float, ...]  # highest-degree first
    grid: tuple[float, ...]
    targets: tuple[float, ...]
    seed: Optional[int] = None  # lets journals rebuild the instance


@dataclass(frozen=True)
class BenchSpec:
    name: str
    dim: int
    polyfit: Optional[PolyfitData] = None

    def __post_init__(self):
        if self.name == "polyfit":
            if self.polyfit is None:
                raise InvalidRangeError("polyfit spec requires planted data; use make_polyfit")
            if self.dim != len(self.polyfit.coeffs):
                raise DimensionMismatchError("polyfit dim must equal degree + 1")
            return
        try:
            fd = _FUNCTIONS[self.name]
        except KeyError:
            raise InvalidRangeError(f"unknown benchmark function {self.name!r}") from None
        if fd.fixed_dim is not None and self.dim != fd.fixed_dim:
            raise InvalidRangeError(f"{self.name} requires dim={fd.fixed_dim}")
        if self.dim < fd.min_dim:
            raise InvalidRangeError(f"{self.name} requires dim >= {fd.min_dim}")

    @property
    def box(self) -> tuple[float, float]:
        if self.name == "polyfit":
            return (-4.0, 4.0)
        return _FUNCTIONS[self.name].box

    def optimum(self) -> np.ndarray:
        if self.name == "polyfit":
            return np.array(self.polyfit.coeffs)
        return _FUNCTIONS[self.name].optimum(self.dim)


def make_polyfit(degree: int, seed=None) -> tuple[BenchSpec, np.ndarray]:
    """Plant a random polynomial and build the noise-free fitting objective.

    Coefficients are drawn uniformly from [-2, 2]; data is the planted
    polynomial sampled on a 64-point uniform grid over [-1, 1]. Returns the
    spec together with the planted coefficients (highest-degree first).
    """
    if not 1 <= degree <= 8:
        raise InvalidRangeError("polyfit degree must be in [1, 8]")
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-2.0, 2.0, size=degree + 1)
    grid = np.linspace(-1.0, 1.0, POLYFIT_GRID_POINTS)
    targets = np.polyval(coeffs, grid)
    data = PolyfitData(coeffs=tuple(float(c) for c in coeffs),
                       grid=tuple(float(t) for t in grid),
                       targets=tuple(float(y) for y in targets),
                       seed=seed)
    return BenchSpec(name="polyfit", dim=degree + 1, polyfit=data), coeffs


def _polyfit_sse(data: PolyfitData, coeffs: np.ndarray) -> float:
    residuals = np.polyval(coeffs, np.asarray(data.grid)) - np.asarray(data.targets)
    return float(np.sum(residuals ** 2))


def eval_bench(spec: BenchSpec, x: np.ndarray) -> float:
    """Evaluate the function at an in-domain point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise DimensionMismatchError(f"expected shape ({spec.dim},), got {x.shape}")
    lo, hi = spec.box
    if np.any(x < lo) or np.any(x > hi):
        raise OutOfDomainError(f"point leaves the {spec.name} box [{lo}, {hi}]")
    if spec.name == "polyfit":
        return _polyfit_sse(spec.polyfit, x)
    return _FUNCTIONS[spec.name].fn(x)


def analytic_gradient(spec: BenchSpec, x: np.ndarray) -> np.ndarray:
    """Gradients for the smooth pool members; exists for gradient sanity tests."""
    x = np.asarray(x, dtype=float)
    if spec.name == "polyfit":
        grid = np.asarray(spec.polyfit.grid)
        residuals = np.polyval(x, grid) - np.asarray(spec.polyfit.targets)
        powers = grid[None, :] ** np.arange(spec.dim - 1, -1, -1)[:, None]
        return 2.0 * powers @ residuals
    grad = _FUNCTIONS[spec.name].gradient
    if grad is None:
        raise ValueError(f"no analytic gradient for {spec.name}")
    return grad(x)


def bench_space(spec: BenchSpec) -> SearchSpace:
    """Continuous search space covering the function's domain box."""
    lo, hi = spec.box
    return SearchSpace(params=tuple(
        ParamSpec(name=f"x{j}", kind=Continuous(lo=lo, hi=hi)) for j in range(spec.dim)
    ))


def genome_evaluator(spec: BenchSpec) -> Callable[[np.ndarray], float]:
    """Objective over unit-cube genomes; skips the per-call domain check
    because the affine map cannot leave the box."""
    lo, hi = spec.box
    span = hi - lo
    if spec.name == "polyfit":
        data = spec.polyfit
        return lambda g: _polyfit_sse(data, lo + g * span)
    fn = _FUNCTIONS[spec.name].fn
    return lambda g: fn(lo + g * span)
