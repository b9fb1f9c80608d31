"""Problem data model for the incomplete intermodal terminal location problem.

An ``Instance`` holds the ground data (customers, candidate terminal sites,
demands, fixed costs, capacities, rail discount) together with explicit unit
cost matrices. A ``VariantSpec`` selects one of the four model variants and
carries its parameters. Both are immutable once constructed.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)


DEFAULT_ALPHA = 0.5
EUCLIDEAN_RTOL = 1e-9


class VariantError(Exception):
    """Raised when a variant does not fit the instance it is applied to."""
    pass


class VariantKind(str, Enum):
    """The four model variants."""
    BASE = "base"
    MIN_LINKS = "min-links"
    HANDLING = "handling"
    PL = "pl"


class LinkMode(str, Enum):
    """Whether the link-count row is an equality or an upper bound."""
    EXACT = "exact"
    AT_MOST = "atmost"


class Point(BaseModel):
    """Planar location in abstract length units."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float
    y: float


@dataclass(frozen=True)
class CostArrays:
    """Numpy view of an instance, built once per solve."""
    n: int
    p: int
    alpha: float
    demand: np.ndarray
    fixed_cost: np.ndarray
    capacity: np.ndarray
    road: np.ndarray
    access: np.ndarray
    inter: np.ndarray

    def demand_pairs(self) -> List[Tuple[int, int]]:
        """Ordered customer pairs with positive demand, row-major."""
        return [
            (i, j) for i in range(self.n) for j in range(self.n)
            if i != j and self.demand[i, j] > 0.0
        ]

    def route_costs(self, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Intermodal unit costs for every pair and ordered site pair.

        Returns:
            Array of shape (len(pairs), p, p) where entry [r, k, m] is
            c_ik + alpha * c_km + c_mj for pair r = (i, j).
        """
        if not pairs:
            return np.zeros((0, self.p, self.p))
        origins = np.array([i for i, _ in pairs])
        dests = np.array([j for _, j in pairs])
        return (
            self.access[origins][:, :, None]
            + self.alpha * self.inter[None, :, :]
            + self.access[dests][:, None, :]
        )


class Instance(BaseModel):
    """Ground data of one problem instance.

    Matrices are stored row-major as nested lists. ``access_cost[i][k]`` is the
    unit cost between customer ``i`` and site ``k`` and is used in both
    directions (customer to terminal and terminal to customer).
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    name: Optional[str] = None
    customers: List[Point] = Field(default_factory=list, description="Customer locations (may be empty)")
    sites: List[Point] = Field(default_factory=list, description="Candidate site locations (may be empty)")
    demand: List[List[float]] = Field(description="n x n goods to ship from i to j")
    fixed_cost: List[float] = Field(description="Opening cost f_k per site")
    capacity: List[float] = Field(description="Throughput capacity C_k per site")
    alpha: float = Field(DEFAULT_ALPHA, gt=0.0, le=1.0, description="Rail discount factor")
    road_cost: List[List[float]] = Field(description="n x n unimodal unit costs c_ij")
    access_cost: List[List[float]] = Field(description="n x p customer-terminal unit costs c_ik")
    inter_cost: List[List[float]] = Field(description="p x p undiscounted terminal-terminal unit costs c_km")
    triangle_ok: bool = Field(False, description="Costs are Euclidean distances of the stored coordinates")

    @model_validator(mode="after")
    def _check_shapes(self) -> "Instance":
        n = len(self.demand)
        p = len(self.fixed_cost)
        if n < 1 or p < 1:
            raise ValueError("an instance needs at least one customer and one site")
        shapes = {
            "demand": (self.demand, n, n),
            "road_cost": (self.road_cost, n, n),
            "access_cost": (self.access_cost, n, p),
            "inter_cost": (self.inter_cost, p, p),
        }
        for field_name, (matrix, rows, cols) in shapes.items():
            if len(matrix) != rows or any(len(row) != cols for row in matrix):
                raise ValueError(f"{field_name} must be {rows} x {cols}")
        if len(self.capacity) != p:
            raise ValueError(f"capacity must have {p} entries")
        if self.customers and len(self.customers) != n:
            raise ValueError(f"customers must list {n} points or be empty")
        if self.sites and len(self.sites) != p:
            raise ValueError(f"sites must list {p} points or be empty")
        if self.triangle_ok and not (self.customers and self.sites):
            raise ValueError("triangle_ok requires customer and site coordinates")
        return self

    @property
    def n(self) -> int:
        """Number of customers."""
        return len(self.demand)

    @property
    def p(self) -> int:
        """Number of candidate sites."""
        return len(self.fixed_cost)

    def to_arrays(self) -> CostArrays:
        return CostArrays(
            n=self.n,
            p=self.p,
            alpha=self.alpha,
            demand=np.asarray(self.demand, dtype=float),
            fixed_cost=np.asarray(self.fixed_cost, dtype=float),
            capacity=np.asarray(self.capacity, dtype=float),
            road=np.asarray(self.road_cost, dtype=float),
            access=np.asarray(self.access_cost, dtype=float),
            inter=np.asarray(self.inter_cost, dtype=float),
        )

    def total_road_cost(self) -> float:
        """Cost of shipping every demand by road, the all-road objective."""
        arrays = self.to_arrays()
        return float(np.sum(arrays.demand * arrays.road))

    @classmethod
    def from_coordinates(
        cls,
        customers: Sequence[Point],
        sites: Sequence[Point],
        demand: Sequence[Sequence[float]],
        fixed_cost: Sequence[float],
        capacity: Sequence[float],
        alpha: float = DEFAULT_ALPHA,
        name: Optional[str] = None,
    ) -> "Instance":
        """Build an instance whose costs are Euclidean distances."""
        road, access, inter = build_costs_from_coordinates(customers, sites)
        return cls(
            name=name,
            customers=list(customers),
            sites=list(sites),
            demand=[list(map(float, row)) for row in demand],
            fixed_cost=[float(v) for v in fixed_cost],
            capacity=[float(v) for v in capacity],
            alpha=alpha,
            road_cost=road.tolist(),
            access_cost=access.tolist(),
            inter_cost=inter.tolist(),
            triangle_ok=True,
        )


class VariantSpec(BaseModel):
    """Which model variant to solve and with which parameters."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: VariantKind = VariantKind.BASE
    l: Optional[int] = Field(None, ge=0, description="Required number of inter-terminal links")
    q_terminals: Optional[int] = Field(None, ge=0, description="Required number of open terminals")
    link_mode: LinkMode = LinkMode.EXACT
    handling_cost: Optional[List[List[float]]] = Field(None, description="p x p handling costs t_km")

    @model_validator(mode="after")
    def _check_parameters(self) -> "VariantSpec":
        needs_l = self.kind in (VariantKind.BASE, VariantKind.HANDLING, VariantKind.PL)
        needs_q = self.kind in (VariantKind.MIN_LINKS, VariantKind.PL)
        if needs_l and self.l is None:
            raise ValueError(f"variant {self.kind.value} requires l")
        if not needs_l and self.l is not None:
            raise ValueError(f"variant {self.kind.value} takes no l")
        if needs_q and self.q_terminals is None:
            raise ValueError(f"variant {self.kind.value} requires q_terminals")
        if not needs_q and self.q_terminals is not None:
            raise ValueError(f"variant {self.kind.value} takes no q_terminals")
        if (self.kind == VariantKind.HANDLING) != (self.handling_cost is not None):
            raise ValueError("handling_cost must be given exactly for the handling variant")
        return self

    @classmethod
    def base(cls, l: int, link_mode: LinkMode = LinkMode.EXACT) -> "VariantSpec":
        return cls(kind=VariantKind.BASE, l=l, link_mode=link_mode)

    @classmethod
    def min_links(cls, q_terminals: int) -> "VariantSpec":
        return cls(kind=VariantKind.MIN_LINKS, q_terminals=q_terminals)

    @classmethod
    def handling(
        cls, l: int, handling_cost: Sequence[Sequence[float]], link_mode: LinkMode = LinkMode.EXACT
    ) -> "VariantSpec":
        return cls(
            kind=VariantKind.HANDLING,
            l=l,
            link_mode=link_mode,
            handling_cost=[list(map(float, row)) for row in handling_cost],
        )

    @classmethod
    def pl(cls, q_terminals: int, l: int, link_mode: LinkMode = LinkMode.EXACT) -> "VariantSpec":
        return cls(kind=VariantKind.PL, q_terminals=q_terminals, l=l, link_mode=link_mode)

    @property
    def has_link_count(self) -> bool:
        """The variant carries the link-count row."""
        return self.l is not None

    @property
    def has_terminal_count(self) -> bool:
        """The variant carries the open-terminal-count row."""
        return self.q_terminals is not None

    @property
    def charges_fixed_cost(self) -> bool:
        """Opening costs f_k enter the objective (base and handling)."""
        return self.kind in (VariantKind.BASE, VariantKind.HANDLING)

    def label(self) -> str:
        """Short human-readable description, e.g. ``base l=4 exact``."""
        parts = [self.kind.value]
        if self.q_terminals is not None:
            parts.append(f"q={self.q_terminals}")
        if self.l is not None:
            parts.append(f"l={self.l}")
            parts.append(self.link_mode.value)
        return " ".join(parts)

    def check_against(self, instance: Instance) -> None:
        """Validate the variant against an instance's dimensions.

        Raises:
            VariantError: If q exceeds p or the handling matrix is malformed
        """
        p = instance.p
        if self.q_terminals is not None and self.q_terminals > p:
            raise VariantError(f"q_terminals={self.q_terminals} exceeds the {p} candidate sites")
        if self.handling_cost is not None:
            t = self.handling_cost
            if len(t) != p or any(len(row) != p for row in t):
                raise VariantError(f"handling_cost must be {p} x {p}")
            if any(v < 0.0 for row in t for v in row):
                raise VariantError("handling_cost entries must be nonnegative")

    def structural_infeasibility(self, p: int) -> Optional[str]:
        """Explain why no configuration can satisfy the link count, if so.

        A simple graph on s vertices has at most s(s-1)/2 edges. Links may only
        join open terminals, so a fixed terminal count q tightens the bound to
        q(q-1)/2. Only equality link rows can be structurally infeasible.
        """
        if self.l is None or self.link_mode != LinkMode.EXACT:
            return None
        vertices = self.q_terminals if self.q_terminals is not None else p
        bound = vertices * (vertices - 1) // 2
        if self.l > bound:
            who = "q_terminals" if self.q_terminals is not None else "p"
            return (
                f"l={self.l} exceeds {who}({who}-1)/2 = {bound}: "
                f"a complete graph on {vertices} terminals has only {bound} links"
            )
        return None


def intermodal_unit_cost(instance: Instance, i: int, j: int, k: int, m: int) -> float:
    """Unit cost of the route i -> terminal k -> rail -> terminal m -> j.

    Raises:
        IndexError: If a customer or site index is out of range
    """
    n, p = instance.n, instance.p
    for label, index, size in (("i", i, n), ("j", j, n), ("k", k, p), ("m", m, p)):
        if not 0 <= index < size:
            raise IndexError(f"{label}={index} out of range [0, {size})")
    return (
        instance.access_cost[i][k]
        + instance.alpha * instance.inter_cost[k][m]
        + instance.access_cost[j][m]
    )


def build_costs_from_coordinates(
    customers: Sequence[Point], sites: Sequence[Point]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Euclidean road, access and inter-terminal cost matrices.

    Returns:
        Tuple of (road_cost n x n, access_cost n x p, inter_cost p x p)
    """
    cust = np.array([[pt.x, pt.y] for pt in customers], dtype=float).reshape(-1, 2)
    site = np.array([[pt.x, pt.y] for pt in sites], dtype=float).reshape(-1, 2)
    if not (np.all(np.isfinite(cust)) and np.all(np.isfinite(site))):
        raise ValueError("coordinates must be finite")
    road = cdist(cust, cust)
    access = cdist(cust, site)
    inter = cdist(site, site)
    # cdist is exactly symmetric; pin the diagonals anyway
    np.fill_diagonal(road, 0.0)
    np.fill_diagonal(inter, 0.0)
    return road, access, inter


class ValidationReport(BaseModel):
    """Violations of the instance invariants; empty when valid."""
    violations: List[str] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_instance(instance: Instance) -> ValidationReport:
    """Check an instance against its data invariants.

    Violations are returned as data; nothing is raised.
    """
    violations: List[str] = []
    arrays = instance.to_arrays()

    for i in range(arrays.n):
        if arrays.demand[i, i] != 0.0:
            violations.append(f"nonzero demand diagonal at index {i}")

    named = {
        "demand": arrays.demand,
        "fixed_cost": arrays.fixed_cost,
        "capacity": arrays.capacity,
        "road_cost": arrays.road,
        "access_cost": arrays.access,
        "inter_cost": arrays.inter,
    }
    for field_name, values in named.items():
        if not np.all(np.isfinite(values)):
            violations.append(f"non-finite entries in {field_name}")
        negative = np.argwhere(values < 0.0)
        if negative.size:
            first = tuple(int(v) for v in negative[0])
            violations.append(f"negative entries in {field_name}, first at {first}")

    inter = arrays.inter
    for k in range(arrays.p):
        if inter[k, k] != 0.0:
            violations.append(f"nonzero inter_cost diagonal at index {k}")
        for m in range(k + 1, arrays.p):
            if inter[k, m] != inter[m, k]:
                violations.append(f"inter_cost not symmetric at ({k}, {m})")

    if instance.triangle_ok:
        road, access, inter_ref = build_costs_from_coordinates(instance.customers, instance.sites)
        for field_name, stored, expected in (
            ("road_cost", arrays.road, road),
            ("access_cost", arrays.access, access),
            ("inter_cost", arrays.inter, inter_ref),
        ):
            if not np.allclose(stored, expected, rtol=EUCLIDEAN_RTOL, atol=0.0):
                violations.append(f"{field_name} differs from the Euclidean distances of the coordinates")

    if violations:
        logger.debug(f"Instance {instance.name or '<unnamed>'} has {len(violations)} violations")
    return ValidationReport(violations=violations)


def max_links(vertices: int) -> int:
    """Edges of the complete graph on ``vertices`` nodes."""
    return vertices * (vertices - 1) // 2 if vertices > 1 else 0


def is_close(a: float, b: float, rtol: float = 1e-6) -> bool:
    """Relative comparison with a floor of 1 on the scale."""
    return math.fabs(a - b) <= rtol * max(1.0, math.fabs(a), math.fabs(b))
