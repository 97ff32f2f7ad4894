"""Eigenbasis, fractional operators, semigroups and Sobolev norms on the
unit interval/square.

Fields are stored as coefficient vectors in a real L2-orthonormal
eigenbasis of -Laplace with either Neumann or periodic boundary
conditions.  All operators used by the solver (fractional powers,
semigroups, Sobolev weights) are diagonal in this basis; products are
evaluated on a dealiased uniform grid and projected back (Galerkin
truncation).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativePowerOnZeroMode, ValidationError

BOUNDARIES = ("periodic", "neumann")
ZERO_MODE_POLICIES = ("drop", "shift", "reject")


@dataclass(frozen=True)
class SpaceConfig:
    """Spatial discretization of the unit box/torus in d = 1 or 2.

    modes_per_axis is the per-axis truncation N; the total mode count is
    K = N**d.  grid_points_per_axis is the quadrature/synthesis grid M.
    zero_mode selects how negative spectral powers treat the constant
    mode: drop it, shift its eigenvalue to 1, or reject fields with
    constant-mode content.
    """

    d: int = 1
    boundary: str = "neumann"
    modes_per_axis: int = 32
    grid_points_per_axis: int = 64
    zero_mode: str = "drop"

    def __post_init__(self):
        violations = []
        if self.d not in (1, 2):
            violations.append(f"d must be 1 or 2, got {self.d}")
        if self.boundary not in BOUNDARIES:
            violations.append(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.modes_per_axis < 2:
            violations.append(f"modes_per_axis must be >= 2, got {self.modes_per_axis}")
        if self.grid_points_per_axis < self.modes_per_axis:
            violations.append(
                "grid_points_per_axis must be >= modes_per_axis, got "
                f"{self.grid_points_per_axis} < {self.modes_per_axis}"
            )
        if (
            self.boundary == "periodic"
            and self.modes_per_axis % 2 == 0
            and self.grid_points_per_axis <= self.modes_per_axis
        ):
            # an even periodic truncation carries an unpaired top cosine
            # mode that aliases onto the constant on an M == N grid
            violations.append(
                "periodic boundary with even modes_per_axis requires "
                "grid_points_per_axis >= modes_per_axis + 1"
            )
        if self.zero_mode not in ZERO_MODE_POLICIES:
            violations.append(
                f"zero_mode must be one of {ZERO_MODE_POLICIES}, got {self.zero_mode!r}"
            )
        if violations:
            raise ValidationError(violations)

    @property
    def total_modes(self) -> int:
        return self.modes_per_axis**self.d


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of -Laplace, sorted by non-decreasing eigenvalue.

    eigenvalues[k] has units 1/length**2; mode_labels[k] holds the
    per-axis frequency labels (cosine index for Neumann, signed Fourier
    index for periodic where negative means the sine partner).  Each
    eigenfunction has unit L2 norm.
    """

    space: SpaceConfig
    eigenvalues: np.ndarray
    mode_labels: np.ndarray  # (K, d) ints

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]


def _axis_labels(space: SpaceConfig) -> np.ndarray:
    n = space.modes_per_axis
    if space.boundary == "neumann":
        return np.arange(n)
    labels = [0]
    m = 1
    while len(labels) < n:
        labels.append(m)
        if len(labels) < n:
            labels.append(-m)
        m += 1
    return np.asarray(labels)


def _axis_eigenvalues(space: SpaceConfig, labels: np.ndarray) -> np.ndarray:
    if space.boundary == "neumann":
        return (np.pi**2) * labels.astype(float) ** 2
    return (4.0 * np.pi**2) * labels.astype(float) ** 2


def _axis_values(space: SpaceConfig, labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Basis function values, shape (len(x), len(labels))."""
    out = np.empty((x.size, labels.size))
    for j, m in enumerate(labels):
        if m == 0:
            out[:, j] = 1.0
        elif space.boundary == "neumann":
            out[:, j] = math.sqrt(2.0) * np.cos(m * np.pi * x)
        elif m > 0:
            out[:, j] = math.sqrt(2.0) * np.cos(2.0 * np.pi * m * x)
        else:
            out[:, j] = math.sqrt(2.0) * np.sin(2.0 * np.pi * (-m) * x)
    return out


def _axis_derivatives(space: SpaceConfig, labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.empty((x.size, labels.size))
    for j, m in enumerate(labels):
        if m == 0:
            out[:, j] = 0.0
        elif space.boundary == "neumann":
            out[:, j] = -math.sqrt(2.0) * m * np.pi * np.sin(m * np.pi * x)
        elif m > 0:
            out[:, j] = -math.sqrt(2.0) * 2.0 * np.pi * m * np.sin(2.0 * np.pi * m * x)
        else:
            out[:, j] = math.sqrt(2.0) * 2.0 * np.pi * (-m) * np.cos(2.0 * np.pi * (-m) * x)
    return out


def _grid_nodes(space: SpaceConfig, m: int) -> np.ndarray:
    if space.boundary == "neumann":
        return (np.arange(m) + 0.5) / m  # midpoint rule, exact for low cosines
    return np.arange(m) / m


class GridPlan:
    """Per-axis synthesis/analysis matrices for one uniform grid size."""

    def __init__(self, basis: "Basis", points_per_axis: int):
        space = basis.space
        self.points_per_axis = points_per_axis
        self.nodes = _grid_nodes(space, points_per_axis)
        self.values = _axis_values(space, basis.axis_labels, self.nodes)
        self.derivatives = _axis_derivatives(space, basis.axis_labels, self.nodes)
        self.weight = points_per_axis ** (-space.d)


class Basis:
    """Immutable-after-build plan cache for one SpaceConfig.

    Holds the sorted eigensystem, the permutation between sorted and
    tensor coefficient order, and lazily built GridPlans.  GridPlan
    construction is guarded by a lock; reads are lock-free afterwards.
    """

    def __init__(self, space: SpaceConfig):
        self.space = space
        self.axis_labels = _axis_labels(space)
        axis_ev = _axis_eigenvalues(space, self.axis_labels)
        n = space.modes_per_axis
        if space.d == 1:
            tensor_ev = axis_ev
            tensor_labels = self.axis_labels[:, None]
        else:
            tensor_ev = (axis_ev[:, None] + axis_ev[None, :]).reshape(-1)
            l1 = np.repeat(self.axis_labels, n)
            l2 = np.tile(self.axis_labels, n)
            tensor_labels = np.stack([l1, l2], axis=1)
        order = np.lexsort(
            tuple(tensor_labels[:, j] for j in reversed(range(space.d))) + (tensor_ev,)
        )
        self.perm = order  # sorted position -> tensor flat index
        self.eigenvalues = tensor_ev[order]
        self.mode_labels = tensor_labels[order]
        self.eigensystem = EigenSystem(space, self.eigenvalues, self.mode_labels)
        self._plans: dict[int, GridPlan] = {}
        self._lock = threading.Lock()

    @property
    def total_modes(self) -> int:
        return self.eigenvalues.shape[0]

    def plan(self, points_per_axis: int | None = None) -> GridPlan:
        m = points_per_axis or self.space.grid_points_per_axis
        got = self._plans.get(m)
        if got is None:
            with self._lock:
                got = self._plans.get(m)
                if got is None:
                    got = GridPlan(self, m)
                    self._plans[m] = got
        return got

    def dealias_points(self, q: float) -> int:
        """Grid size for degree-(q+1) products, re-projected exactly for
        integer q; non-integer q keeps the same rule on ceil(q)."""
        factor = math.ceil((math.ceil(q) + 2) / 2)
        return factor * self.space.modes_per_axis

    # -- coefficient layout ------------------------------------------------

    def to_tensor(self, coeffs: np.ndarray) -> np.ndarray:
        """Sorted coefficient vector(s) -> tensor-ordered array."""
        n = self.space.modes_per_axis
        out = np.empty_like(coeffs)
        out[..., self.perm] = coeffs
        if self.space.d == 2:
            return out.reshape(coeffs.shape[:-1] + (n, n))
        return out

    def from_tensor(self, tensor: np.ndarray) -> np.ndarray:
        if self.space.d == 2:
            n = self.space.modes_per_axis
            tensor = tensor.reshape(tensor.shape[:-2] + (n * n,))
        return tensor[..., self.perm]

    # -- synthesis / analysis ------------------------------------------------

    def synthesize(self, coeffs: np.ndarray, points_per_axis: int | None = None) -> np.ndarray:
        """Physical grid values; shape batch + (M,) or batch + (M, M)."""
        plan = self.plan(points_per_axis)
        t = self.to_tensor(np.asarray(coeffs, dtype=float))
        if self.space.d == 1:
            return t @ plan.values.T
        # out[x, y] = sum_ij V[x, i] t[i, j] V[y, j]
        return np.matmul(plan.values, np.matmul(t, plan.values.T))

    def synthesize_gradient(
        self, coeffs: np.ndarray, points_per_axis: int | None = None
    ) -> np.ndarray:
        """Spatial gradient on the grid, shape (d,) + batch + grid."""
        plan = self.plan(points_per_axis)
        t = self.to_tensor(np.asarray(coeffs, dtype=float))
        if self.space.d == 1:
            return (t @ plan.derivatives.T)[None, ...]
        gx = np.matmul(plan.derivatives, np.matmul(t, plan.values.T))
        gy = np.matmul(plan.values, np.matmul(t, plan.derivatives.T))
        return np.stack([gx, gy], axis=0)

    def analyze(self, values: np.ndarray, points_per_axis: int | None = None) -> np.ndarray:
        """L2 projection of grid values onto the basis by quadrature."""
        plan = self.plan(points_per_axis)
        values = np.asarray(values, dtype=float)
        if self.space.d == 1:
            t = values @ plan.values * plan.weight
        else:
            # t[i, j] = w sum_xy V[x, i] F[x, y] V[y, j]
            t = plan.weight * np.matmul(plan.values.T, np.matmul(values, plan.values))
        return self.from_tensor(t)

    def quadrature(self, values: np.ndarray, points_per_axis: int | None = None) -> np.ndarray:
        """Integral of grid values over the unit box."""
        plan = self.plan(points_per_axis)
        axes = tuple(range(-self.space.d, 0))
        return np.asarray(values).sum(axis=axes) * plan.weight


_BASIS_CACHE: dict[SpaceConfig, Basis] = {}
_BASIS_LOCK = threading.Lock()


def get_basis(space: SpaceConfig) -> Basis:
    got = _BASIS_CACHE.get(space)
    if got is None:
        with _BASIS_LOCK:
            got = _BASIS_CACHE.get(space)
            if got is None:
                got = Basis(space)
                _BASIS_CACHE[space] = got
    return got


@dataclass
class SpectralField:
    """One scalar field as eigenbasis coefficients ``<f, phi_k>``."""

    coeffs: np.ndarray
    space: SpaceConfig

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = self.space.total_modes
        if self.coeffs.shape != (expected,):
            raise ValidationError(
                [f"coefficient vector must have shape ({expected},), got {self.coeffs.shape}"]
            )

    def values(self, points_per_axis: int | None = None) -> np.ndarray:
        return get_basis(self.space).synthesize(self.coeffs, points_per_axis)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.dot(self.coeffs, self.coeffs)))

    def copy(self) -> "SpectralField":
        return SpectralField(self.coeffs.copy(), self.space)


def field_from_values(values: np.ndarray, space: SpaceConfig,
                      points_per_axis: int | None = None) -> SpectralField:
    return SpectralField(get_basis(space).analyze(values, points_per_axis), space)


def constant_field(value: float, space: SpaceConfig) -> SpectralField:
    coeffs = np.zeros(space.total_modes)
    coeffs[0] = value  # phi_0 is the constant function 1
    return SpectralField(coeffs, space)


def mode_field(space: SpaceConfig, k: int, amplitude: float = 1.0) -> SpectralField:
    coeffs = np.zeros(space.total_modes)
    coeffs[k] = amplitude
    return SpectralField(coeffs, space)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def build_eigensystem(space: SpaceConfig) -> EigenSystem:
    """K eigenpairs of -Laplace on [0,1]^d for the configured boundary.

    Neumann uses products of cos(pi k x) with eigenvalue pi^2 |k|^2;
    periodic uses real Fourier modes with eigenvalue 4 pi^2 |m|^2.
    """
    return get_basis(space).eigensystem


def fractional_weights(space: SpaceConfig, s: float) -> np.ndarray:
    """Per-mode multipliers lambda_k**s under the zero-mode policy."""
    lam = get_basis(space).eigenvalues
    w = np.empty_like(lam)
    pos = lam > 0.0
    w[pos] = lam[pos] ** s
    if s > 0:
        w[~pos] = 0.0
    elif s == 0:
        w[~pos] = 1.0
    else:
        w[~pos] = 0.0 if space.zero_mode in ("drop", "reject") else 1.0
    return w


def apply_fractional_laplacian(f: SpectralField, s: float) -> SpectralField:
    """Apply (-Laplace)**s mode by mode: coeff_k -> lambda_k**s coeff_k.

    For s < 0 the constant mode is handled by the configured zero-mode
    policy; under 'reject' a nonzero constant coefficient raises.
    """
    if s < 0 and f.space.zero_mode == "reject" and f.coeffs[0] != 0.0:
        raise NegativePowerOnZeroMode(
            "negative power requested on a field with nonzero constant mode"
        )
    return SpectralField(f.coeffs * fractional_weights(f.space, s), f.space)


def semigroup_factors(space: SpaceConfig, operator_kind: str, r: float, a: float,
                      t: float, aleph: float | None = None) -> np.ndarray:
    """Per-mode factors exp((-r lambda_k**power + a) t)."""
    lam = get_basis(space).eigenvalues
    if operator_kind == "laplace":
        powered = lam
    elif operator_kind == "fractional":
        if aleph is None:
            raise ValidationError(["fractional semigroup requires an 'aleph' exponent"])
        powered = lam ** (aleph / 2.0)
    else:
        raise ValidationError([f"unknown operator kind {operator_kind!r}"])
    return np.exp((-r * powered + a) * t)


def semigroup_step(f: SpectralField, generator: dict, t: float) -> SpectralField:
    """Exact semigroup action e^{(r L + a I) t} on a field.

    generator keys: operator_kind ('laplace' or 'fractional'), r, a, and
    aleph when fractional.  t must be non-negative.
    """
    if t < 0:
        raise ValidationError(["semigroup time must be >= 0"])
    factors = semigroup_factors(
        f.space,
        generator["operator_kind"],
        generator["r"],
        generator["a"],
        t,
        generator.get("aleph"),
    )
    return SpectralField(f.coeffs * factors, f.space)


def sobolev_weights(space: SpaceConfig, s: float) -> np.ndarray:
    return (1.0 + get_basis(space).eigenvalues) ** s


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Inhomogeneous H^s norm ( sum_k (1+lambda_k)^s coeff_k^2 )^(1/2).

    The (I - Laplace) weight makes H^0 coincide with L2 exactly and keeps
    negative-order norms finite on the constant mode.
    """
    return float(np.sqrt(np.sum(sobolev_weights(f.space, s) * f.coeffs**2)))


def lp_norm(f: SpectralField, p: float, points_per_axis: int | None = None) -> float:
    """Grid-quadrature L^p norm on the configured uniform grid."""
    if p < 1:
        raise ValidationError(["lp_norm requires p >= 1"])
    basis = get_basis(f.space)
    vals = basis.synthesize(f.coeffs, points_per_axis)
    return float(basis.quadrature(np.abs(vals) ** p, points_per_axis) ** (1.0 / p))


def galerkin_product(space: SpaceConfig, *factor_coeffs: np.ndarray,
                     q_degree: float = 1.0) -> np.ndarray:
    """Pointwise product of band-limited fields, projected back to the basis.

    Evaluates on the dealiased grid sized for a degree-(q_degree + 1)
    product.  Accepts batched coefficient arrays.
    """
    basis = get_basis(space)
    m = basis.dealias_points(q_degree)
    vals = basis.synthesize(factor_coeffs[0], m)
    for more in factor_coeffs[1:]:
        vals = vals * basis.synthesize(more, m)
    return basis.analyze(vals, m)
