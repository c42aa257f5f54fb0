"""Maximum-modulus validation tests built on weighted Fourier coefficients.

The pipeline estimates the physical response by kernel ridge regression,
estimates the input density, and projects the weighted discrepancy
(fit minus simulator, times the square root of the density) onto an
orthonormal Fourier basis.  The test statistic is the largest decay-
weighted, noise-standardized coefficient; its null distribution has the
closed form F(t) = prod_j (2 Phi(t / rho_j) - 1), one factor per basis
element, which yields analytic p-values for the global test and for
each cell of a partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .basis import BasisIndex, basis_table_1d, default_kmax, enumerate_basis
from .density import fit_density, kde_eval_grid
from .domain import Box, check_partition
from .errors import ConfigurationError, DomainError
from .kernels import MaternParams
from .krr import KrrFit, cross_validate_lambda, fit_krr, matern_matvec
from .quadrature import grid_points, tensor_rule

SIGMA_FLOOR_REL = 1e-8
COEFF_ZERO_REL = 1e-4


@dataclass(frozen=True)
class TestConfig:
    """Knobs of the validation pipeline with the recommended defaults."""

    ell: float = 0.7
    k_max: int | None = None
    quad_points_per_dim: int | None = None
    alpha: float = 0.05
    kernel: MaternParams = field(default_factory=lambda: MaternParams(3.5, 1.0))
    cv_folds: int = 5
    cv_c_grid: tuple[float, ...] | None = None
    cv_seed: int = 0
    density_c_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.ell <= 0.5:
            raise ConfigurationError(f"ell must be > 0.5, got {self.ell}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.k_max is not None and self.k_max < 0:
            raise ConfigurationError("k_max must be >= 0")

    def resolve_kmax(self, n: int) -> int:
        return self.k_max if self.k_max is not None else default_kmax(n)

    def resolve_quad(self, k_max: int) -> int:
        quad = self.quad_points_per_dim
        if quad is None:
            quad = max(512, 32 * (k_max + 1))
        if quad < 16 * (k_max + 1):
            raise ConfigurationError(
                f"quad_points_per_dim = {quad} cannot resolve frequencies up to "
                f"{k_max}; need at least {16 * (k_max + 1)}"
            )
        return quad


@dataclass(frozen=True)
class CoefficientRecord:
    """One basis element with its estimated coefficient and standardized value."""

    index: BasisIndex
    s_hat: float
    weighted_z: float


@dataclass(frozen=True)
class TestReport:
    """Outcome of one maximum-modulus test on one box."""

    statistic: float
    p_value: float
    coefficients: tuple[CoefficientRecord, ...]
    sigma_hat: float
    k_max: int
    box: Box
    status: str = "ok"


@dataclass(frozen=True)
class SubdomainReport:
    """Per-subdomain tests with Bonferroni family-wise control."""

    reports: tuple[TestReport, ...]
    bonferroni_adjusted_p: tuple[float, ...]
    rejected_ier: tuple[bool, ...]
    rejected_fwer: tuple[bool, ...]
    alpha: float
    partition: tuple[Box, ...]


def bonferroni_adjust(p_values) -> np.ndarray:
    """Bonferroni-adjusted p-values min(1, N * p)."""
    p = np.asarray(p_values, dtype=float)
    return np.minimum(1.0, p.size * p)


def _log_factors(t: float, rhos: np.ndarray) -> np.ndarray:
    # 2*Phi(t/rho) - 1 = erf(t / (rho sqrt(2))) = 1 - erfc(...); the log1p(-erfc)
    # form keeps full precision where the factors approach one.
    with np.errstate(divide="ignore"):
        return np.log1p(-erfc(t / (rhos * math.sqrt(2.0))))


def limiting_cdf(t: float, rhos) -> float:
    """F(t) = prod_j (2 Phi(t / rho_j) - 1) over the supplied decay weights."""
    rhos = np.asarray(rhos, dtype=float)
    if np.any(rhos <= 0) or not np.all(np.isfinite(rhos)):
        raise DomainError("decay weights must be finite and positive")
    if t < 0:
        raise DomainError("the statistic is nonnegative")
    if math.isinf(t):
        return 1.0
    return float(np.exp(np.sum(_log_factors(t, rhos))))


def limiting_p_value(t: float, rhos) -> float:
    """1 - F(t), computed to full precision in both tails."""
    rhos = np.asarray(rhos, dtype=float)
    if np.any(rhos <= 0) or not np.all(np.isfinite(rhos)):
        raise DomainError("decay weights must be finite and positive")
    if t < 0:
        raise DomainError("the statistic is nonnegative")
    if math.isinf(t):
        return 0.0
    return float(-np.expm1(np.sum(_log_factors(t, rhos))))


def _element_position(k: int, phase: str) -> int:
    return 0 if k == 0 else 2 * k - 1 + (phase == "sin")


def _contract(values: np.ndarray, axes, tables: list[np.ndarray]) -> np.ndarray:
    """Coefficient table over per-dimension element indices.

    values is the integrand on the flattened tensor grid; the result has
    shape (E_1, ..., E_d) with E_m 1D elements along dimension m.
    """
    shape = [nodes.size for nodes, _ in axes]
    block = values.reshape(shape).copy()
    for m, (_, weights) in enumerate(axes):
        block *= weights.reshape([-1 if q == m else 1 for q in range(len(axes))])
    for table in tables:
        block = np.tensordot(block, table.T, axes=([0], [0]))
    return block


def fourier_coefficients(discrepancy, sqrt_density, basis: list[BasisIndex],
                         box: Box, quad_points_per_dim: int) -> np.ndarray:
    """Coefficients int (discrepancy * sqrt_density * h_j) over the box.

    Both callables are evaluated once on a shared tensor-product
    Gauss-Legendre grid; every basis integral is then a contraction of
    that single pass.
    """
    if not basis:
        return np.array([])
    k_max = max(idx.total_frequency for idx in basis)
    if quad_points_per_dim < 16 * (k_max + 1):
        raise ConfigurationError(
            f"quadrature resolution {quad_points_per_dim} below the minimum "
            f"{16 * (k_max + 1)} for frequencies up to {k_max}"
        )
    axes = tensor_rule(box, quad_points_per_dim)
    pts = grid_points(axes)
    values = np.asarray(discrepancy(pts), dtype=float) * np.asarray(
        sqrt_density(pts), dtype=float
    )
    tables = [
        basis_table_1d(k_max, nodes, lo, hi)
        for (nodes, _), (lo, hi) in zip(axes, box.bounds)
    ]
    return _coefficients_from_table(_contract(values, axes, tables), basis)


def _coefficients_from_table(table: np.ndarray, basis: list[BasisIndex]) -> np.ndarray:
    out = np.empty(len(basis))
    for i, idx in enumerate(basis):
        pos = tuple(_element_position(k, phase) for k, phase in idx.per_dim)
        out[i] = table[pos]
    return out


def test_statistic(coeffs, rhos, n: int, sigma_hat: float,
                   zero_tol: float = 0.0) -> float:
    """T = max_j |sqrt(n) rho_j s_j / sigma|.

    With sigma_hat = 0 the statistic degenerates: 0 when every
    coefficient is within zero_tol of zero, +inf otherwise.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    if sigma_hat < 0:
        raise DomainError("sigma_hat must be >= 0")
    if sigma_hat == 0.0:
        return 0.0 if np.all(np.abs(coeffs) <= zero_tol) else math.inf
    return float(np.max(np.abs(math.sqrt(n) * rhos * coeffs / sigma_hat)))


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(data, "points") and hasattr(data, "responses"):
        X, Y = data.points, data.responses
    else:
        X, Y = data
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X, np.asarray(Y, dtype=float).ravel()


def _box_report(fit: KrrFit, density, simulator, box: Box, k_max: int,
                quad: int, ell: float, n: int, sigma_hat: float,
                scale: float) -> TestReport:
    basis = enumerate_basis(k_max, box.dim, ell)
    axes = tensor_rule(box, quad)
    pts = grid_points(axes)
    disc = matern_matvec(pts, fit.centers, fit.weights, fit.params) - np.asarray(
        simulator(pts), dtype=float
    )
    sqrt_p = np.sqrt(kde_eval_grid(density, [nodes for nodes, _ in axes])).ravel()
    tables = [
        basis_table_1d(k_max, nodes, lo, hi)
        for (nodes, _), (lo, hi) in zip(axes, box.bounds)
    ]
    coeffs = _coefficients_from_table(_contract(disc * sqrt_p, axes, tables), basis)
    rhos = np.array([idx.decay_weight for idx in basis])

    degenerate = sigma_hat <= SIGMA_FLOOR_REL * scale
    zero_tol = COEFF_ZERO_REL * scale
    if degenerate:
        T = test_statistic(coeffs, rhos, n, 0.0, zero_tol)
        z = np.where(np.abs(coeffs) <= zero_tol, 0.0, np.sign(coeffs) * math.inf)
        status = "degenerate-noise"
    else:
        T = test_statistic(coeffs, rhos, n, sigma_hat)
        z = math.sqrt(n) * rhos * coeffs / sigma_hat
        status = "ok"
    records = tuple(
        CoefficientRecord(index=idx, s_hat=float(s), weighted_z=float(zz))
        for idx, s, zz in zip(basis, coeffs, z)
    )
    return TestReport(
        statistic=T,
        p_value=limiting_p_value(T, rhos),
        coefficients=records,
        sigma_hat=sigma_hat,
        k_max=k_max,
        box=box,
        status=status,
    )


@dataclass(frozen=True)
class ValidationResult:
    """Global and subdomain reports plus the shared fitted artifacts."""

    global_report: TestReport
    subdomain_report: SubdomainReport | None
    fit: KrrFit
    density: object
    lam: float


def run_validation(data, simulator, domain: Box,
                   partition: list[Box] | tuple[Box, ...] | None = None,
                   config: TestConfig | None = None) -> ValidationResult:
    """Shared pipeline: one fit and one density serve the global test and
    every subdomain test."""
    config = config or TestConfig()
    X, Y = _as_xy(data)
    n = X.shape[0]
    if n < 5:
        raise DomainError(f"need at least 5 observations, got {n}")
    if X.shape[1] != domain.dim:
        raise DomainError("data dimension does not match the domain")
    if not np.all(domain.contains(X)):
        raise DomainError("data points fall outside the domain box")
    if partition is not None:
        check_partition(list(partition), domain)

    k_max = config.resolve_kmax(n)
    quad = config.resolve_quad(k_max)
    c_grid = config.cv_c_grid if config.cv_c_grid is not None else None
    lam = cross_validate_lambda(
        X, Y, config.kernel, c_grid, folds=config.cv_folds, seed=config.cv_seed
    )
    fit = fit_krr(X, Y, config.kernel, lam)
    density = fit_density(X, domain, config.density_c_grid)
    scale = max(1.0, float(np.sqrt(np.mean(Y ** 2))))

    def report_for(box: Box) -> TestReport:
        return _box_report(
            fit, density, simulator, box, k_max, quad, config.ell, n,
            fit.sigma_hat, scale,
        )

    global_report = report_for(domain)
    sub_report = None
    if partition is not None:
        reports = tuple(report_for(box) for box in partition)
        p = np.array([r.p_value for r in reports])
        adj = bonferroni_adjust(p)
        sub_report = SubdomainReport(
            reports=reports,
            bonferroni_adjusted_p=tuple(float(a) for a in adj),
            rejected_ier=tuple(bool(v) for v in p < config.alpha),
            rejected_fwer=tuple(bool(v) for v in adj < config.alpha),
            alpha=config.alpha,
            partition=tuple(partition),
        )
    return ValidationResult(
        global_report=global_report,
        subdomain_report=sub_report,
        fit=fit,
        density=density,
        lam=lam,
    )


def global_test(data, simulator, box: Box, config: TestConfig | None = None) -> TestReport:
    """Test whether the data are consistent with the simulator over the box."""
    return run_validation(data, simulator, box, None, config).global_report


def subdomain_tests(data, simulator, partition, config: TestConfig | None = None,
                    domain: Box | None = None) -> SubdomainReport:
    """Run one test per partition cell with shared fit, noise, and density.

    The partition must tile a box (checked by volume); the overall domain
    defaults to the hull of the partition.
    """
    domain = check_partition(list(partition), domain)
    return run_validation(data, simulator, domain, partition, config).subdomain_report
