"""Deterministic random instance generation.

Instances follow the classical protocol for this problem family: customers
and sites uniform on a square, demands, opening costs and capacities uniform
on fixed intervals, costs equal to Euclidean distances.

Random stream
-------------
Every draw comes from a PCG64 bit generator seeded through NumPy's
``SeedSequence(seed)``. A uniform double on ``[0, high]`` is built from one
raw 64-bit output ``r`` as ``high * (r >> 11) * 2**-53``. Both PCG64 and
SeedSequence are fixed, documented algorithms on unsigned 64-bit integers, so
the same seed gives bit-identical instances on every platform.

Draw order: customer coordinates (x then y, by customer index), site
coordinates (same order), the full n x n demand matrix row-major (diagonal
draws are consumed and then set to zero), fixed costs by site, capacities by
site.
"""
import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from models.instance import DEFAULT_ALPHA, Instance, Point

logger = logging.getLogger(__name__)


COORD_MAX = 1e4
DEMAND_MAX = 500.0
FIXED_MAX = 5e5
CAPACITY_MAX = 1e4
HANDLING_MAX = 1e3

_DOUBLE_SCALE = 2.0 ** -53


class GenSpec(BaseModel):
    """Parameters of one generated instance."""
    n: int = Field(ge=1, description="Number of customers")
    p: int = Field(ge=1, description="Number of candidate sites")
    seed: int = Field(ge=0, lt=2 ** 64)
    coord_max: float = Field(COORD_MAX, gt=0.0)
    demand_max: float = Field(DEMAND_MAX, ge=0.0)
    fixed_max: float = Field(FIXED_MAX, ge=0.0)
    capacity_max: float = Field(CAPACITY_MAX, ge=0.0)
    alpha: float = Field(DEFAULT_ALPHA, gt=0.0, le=1.0)
    name: Optional[str] = None


class UniformStream:
    """Portable uniform doubles drawn from a seeded PCG64 generator."""

    def __init__(self, seed: int):
        self.bit_generator = np.random.PCG64(seed)

    def uniform(self, high: float, size: int) -> np.ndarray:
        """Draw ``size`` doubles uniform on ``[0, high]``."""
        if size == 0:
            return np.zeros(0)
        raw = self.bit_generator.random_raw(size)
        raw = np.asarray(raw, dtype=np.uint64).reshape(-1)
        return high * ((raw >> np.uint64(11)).astype(np.float64) * _DOUBLE_SCALE)


def _points(values: np.ndarray) -> List[Point]:
    return [Point(x=float(x), y=float(y)) for x, y in values.reshape(-1, 2)]


def generate(spec: GenSpec) -> Instance:
    """Generate one instance from its spec.

    Args:
        spec: Sizes, seed and value ranges

    Returns:
        Coordinate-built Instance (costs are Euclidean, ``triangle_ok`` set)
    """
    n, p = spec.n, spec.p
    stream = UniformStream(spec.seed)

    customers = _points(stream.uniform(spec.coord_max, 2 * n))
    sites = _points(stream.uniform(spec.coord_max, 2 * p))
    demand = stream.uniform(spec.demand_max, n * n).reshape(n, n)
    np.fill_diagonal(demand, 0.0)
    fixed_cost = stream.uniform(spec.fixed_max, p)
    capacity = stream.uniform(spec.capacity_max, p)

    name = spec.name or f"{n}C{p}L-s{spec.seed}"
    logger.debug(f"Generated instance {name} (n={n}, p={p}, seed={spec.seed})")
    return Instance.from_coordinates(
        customers=customers,
        sites=sites,
        demand=demand.tolist(),
        fixed_cost=fixed_cost.tolist(),
        capacity=capacity.tolist(),
        alpha=spec.alpha,
        name=name,
    )


def generate_handling_costs(p: int, seed: int, t_max: float = HANDLING_MAX) -> List[List[float]]:
    """Asymmetric handling-cost matrix t_km, uniform on [0, t_max], zero diagonal.

    Drawn row-major from its own stream so the instance seed and the handling
    seed vary independently.
    """
    if p < 1:
        raise ValueError("p must be positive")
    t = UniformStream(seed).uniform(t_max, p * p).reshape(p, p)
    np.fill_diagonal(t, 0.0)
    return t.tolist()
