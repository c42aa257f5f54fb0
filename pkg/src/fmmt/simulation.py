"""Scenario registry and Monte Carlo power/Type-I study engine.

Fourteen built-in scenarios cover 1D global alternatives, 1D subdomain
alternatives, and 2D global/quadrant alternatives.  Every replication
draws its generator from a counter-based seed keyed by (study seed,
position of c in the sorted grid, replication index), so tables are
reproducible no matter the execution order or parallelism.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .baselines import eh_test
from .domain import Box
from .errors import DomainError
from .validation import TestConfig, run_validation

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Scenario:
    """A data-generating benchmark: null model, c-indexed alternative, design."""

    name: str
    dimension: int
    domain: Box
    null_fn: Callable[[np.ndarray], np.ndarray]
    alt_fn: Callable[[np.ndarray, float], np.ndarray]
    noise_sd: float
    design: str
    partition: tuple[Box, ...]
    default_n: int
    description: str = ""

    @property
    def slug(self) -> str:
        return slugify(self.name)


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def _thirds() -> tuple[Box, ...]:
    return tuple(Box.interval(0.0, 1.0).split(3))


def _quadrants() -> tuple[Box, ...]:
    # Counterclockwise from the upper-right, matching the quadrant scenarios.
    return (
        Box(((0.5, 1.0), (0.5, 1.0))),
        Box(((0.0, 0.5), (0.5, 1.0))),
        Box(((0.0, 0.5), (0.0, 0.5))),
        Box(((0.5, 1.0), (0.0, 0.5))),
    )


def _base_2d(x: np.ndarray) -> np.ndarray:
    x1, x2 = x[:, 0], x[:, 1]
    return (1.0 + 0.5 * (x1 + x2) + 0.3 * x1 * x2
            + 0.2 * np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2))


def _sin_mod_2d(x: np.ndarray) -> np.ndarray:
    return np.sin(TWO_PI * x[:, 0]) * np.sin(TWO_PI * x[:, 1])


def _in_box(x: np.ndarray, lo1, hi1, lo2, hi2) -> np.ndarray:
    return ((x[:, 0] >= lo1) & (x[:, 0] <= hi1)
            & (x[:, 1] >= lo2) & (x[:, 1] <= hi2)).astype(float)


def _scenario_1d(name, null, alt, description) -> Scenario:
    return Scenario(
        name=name, dimension=1, domain=Box.interval(0.0, 1.0),
        null_fn=null, alt_fn=alt, noise_sd=0.1, design="uniform",
        partition=_thirds(), default_n=50, description=description,
    )


def _scenario_2d(name, alt, description) -> Scenario:
    return Scenario(
        name=name, dimension=2, domain=Box.unit(2),
        null_fn=_base_2d, alt_fn=alt, noise_sd=0.1, design="uniform",
        partition=_quadrants(), default_n=200, description=description,
    )


def builtin_scenarios() -> tuple[Scenario, ...]:
    """All built-in benchmark scenarios."""
    const = lambda x: np.ones(x.shape[0])
    exp = lambda x: np.exp(x[:, 0])
    sin1 = lambda x: np.sin(TWO_PI * x[:, 0])

    scenarios = [
        _scenario_1d("Const-Linear", const,
                     lambda x, c: 1.0 + c * x[:, 0],
                     "constant null, linear drift alternative"),
        _scenario_1d("Exp-Linear", exp,
                     lambda x, c: np.exp(x[:, 0]) + c * x[:, 0],
                     "exponential null, linear drift alternative"),
        _scenario_1d("Sin-Linear", sin1,
                     lambda x, c: np.sin(TWO_PI * x[:, 0]) + c * x[:, 0],
                     "sine null, linear drift alternative"),
        _scenario_1d("Const-Sin", const,
                     lambda x, c: 1.0 + c * np.sin(TWO_PI * x[:, 0]),
                     "constant null, sinusoidal alternative"),
        _scenario_1d("Exp-Sin", exp,
                     lambda x, c: np.exp(x[:, 0]) + c * np.sin(TWO_PI * x[:, 0]),
                     "exponential null, sinusoidal alternative"),
        _scenario_1d("Sin-Scale", sin1,
                     lambda x, c: (1.0 + c) * np.sin(TWO_PI * x[:, 0]),
                     "sine null, amplitude-scaled alternative"),
        _scenario_1d("Sub1 Low Frequency", exp,
                     lambda x, c: np.exp(x[:, 0]) + c * np.sin(6 * math.pi * x[:, 0])
                     * (x[:, 0] < 1.0 / 3.0),
                     "sin(6 pi x) bump confined to the first third"),
        _scenario_1d("Sub1 High Frequency", exp,
                     lambda x, c: np.exp(x[:, 0]) + c * np.cos(12 * math.pi * x[:, 0])
                     * (x[:, 0] < 1.0 / 3.0),
                     "cos(12 pi x) bump confined to the first third"),
        _scenario_1d("Multi Subdomain", exp,
                     lambda x, c: np.exp(x[:, 0]) + c * np.sin(6 * math.pi * x[:, 0])
                     * (x[:, 0] < 2.0 / 3.0),
                     "sin(6 pi x) bump over the first two thirds"),
        _scenario_2d("2D-Sin",
                     lambda x, c: _base_2d(x) + c * _sin_mod_2d(x),
                     "global sinusoidal modulation in both coordinates"),
        _scenario_2d("2D-Constant",
                     lambda x, c: _base_2d(x) + c,
                     "global constant shift"),
        _scenario_2d("Quad 1 Modulation",
                     lambda x, c: _base_2d(x) + c * _sin_mod_2d(x)
                     * _in_box(x, 0.5, 1.0, 0.5, 1.0),
                     "modulation confined to the upper-right quadrant"),
        _scenario_2d("Quad 2 Modulation",
                     lambda x, c: _base_2d(x) + c * _sin_mod_2d(x)
                     * _in_box(x, 0.0, 0.5, 0.5, 1.0),
                     "modulation confined to the upper-left quadrant"),
        _scenario_2d("Multi Quad Modulation",
                     lambda x, c: _base_2d(x) + c * _sin_mod_2d(x)
                     * (_in_box(x, 0.5, 1.0, 0.5, 1.0) + _in_box(x, 0.0, 0.5, 0.5, 1.0)),
                     "modulation over both upper quadrants"),
    ]
    return tuple(scenarios)


def get_scenario(name: str) -> Scenario:
    """Look up a scenario by name (case- and separator-insensitive)."""
    want = slugify(name)
    for scenario in builtin_scenarios():
        if scenario.slug == want:
            return scenario
    names = ", ".join(s.slug for s in builtin_scenarios())
    raise DomainError(f"unknown scenario {name!r}; valid names: {names}")


def sample_design(design: str, n: int, box: Box, rng) -> np.ndarray:
    """Draw n design points: 'uniform' or 'truncated-normal' (mean 0.5, sd 0.2)."""
    rng = np.random.default_rng(rng)
    if design == "uniform":
        u = rng.random((n, box.dim))
        return box.lower + u * box.lengths
    if design == "truncated-normal":
        out = np.empty((n, box.dim))
        for m, (lo, hi) in enumerate(box.bounds):
            got = 0
            while got < n:
                draw = rng.normal(0.5, 0.2, n)
                keep = draw[(draw >= lo) & (draw <= hi)]
                take = min(n - got, keep.size)
                out[got:got + take, m] = keep[:take]
                got += take
        return out
    raise DomainError(f"unknown design {design!r}")


def child_rng(seed: int, c_index: int, rep: int) -> np.random.Generator:
    """Independent stream for one (c, replication) cell of a study."""
    ss = np.random.SeedSequence(seed, spawn_key=(c_index, rep))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class PowerTable:
    """Rejection rates by c for each test in a study."""

    scenario: str
    c_grid: tuple[float, ...]
    rates: dict[str, tuple[float, ...]]
    n: int
    alpha: float
    replications: int
    seed: int

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.rates[name])


def run_study(scenario: Scenario, c_grid, n: int | None = None, reps: int = 1000,
              alpha: float = 0.05, config: TestConfig | None = None, seed: int = 0,
              include_eh: bool | None = None, design: str | None = None,
              noise_sd: float | None = None) -> PowerTable:
    """Monte Carlo rejection rates over a grid of modulation strengths.

    The c grid is sorted ascending and each (c, replication) cell uses its
    own counter-derived seed, so the resulting table does not depend on
    the order or parallelism of execution.
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    n = n if n is not None else scenario.default_n
    design = design if design is not None else scenario.design
    sd = noise_sd if noise_sd is not None else scenario.noise_sd
    config = replace(config or TestConfig(), alpha=alpha)
    if include_eh is None:
        include_eh = scenario.dimension == 1
    if include_eh and scenario.dimension != 1:
        raise DomainError("the order-selection baseline applies to 1D scenarios only")

    cs = np.sort(np.asarray(c_grid, dtype=float).ravel())
    n_sub = len(scenario.partition)
    columns = (["global"] + [f"subdomain_{i + 1}" for i in range(n_sub)]
               + ["bonferroni"] + (["eh"] if include_eh else []))
    counts = {name: np.zeros(cs.size) for name in columns}

    null_1d = (lambda x: scenario.null_fn(np.asarray(x)[:, None])) if include_eh else None
    for ci, c in enumerate(cs):
        for r in range(reps):
            rng = child_rng(seed, ci, r)
            X = sample_design(design, n, scenario.domain, rng)
            y = scenario.alt_fn(X, float(c)) + rng.normal(0.0, sd, n)
            g_report, sub_report = run_validation(
                (X, y), scenario.null_fn, scenario.domain, scenario.partition, config
            )
            counts["global"][ci] += g_report.p_value < alpha
            for i, rej in enumerate(sub_report.rejected_ier):
                counts[f"subdomain_{i + 1}"][ci] += rej
            counts["bonferroni"][ci] += any(sub_report.rejected_fwer)
            if include_eh:
                counts["eh"][ci] += eh_test(X[:, 0], y, null_1d, alpha).reject
    rates = {name: tuple(float(v) for v in counts[name] / reps) for name in columns}
    return PowerTable(
        scenario=scenario.name,
        c_grid=tuple(float(c) for c in cs),
        rates=rates,
        n=n,
        alpha=alpha,
        replications=reps,
        seed=seed,
    )
