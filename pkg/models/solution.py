"""Solution-side data models: configurations, solutions, solver parameters."""
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator

from .instance import VariantKind, VariantSpec


class SolveStatus(str, Enum):
    """Outcome of a solve."""
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"


class InfeasibilityKind(str, Enum):
    """Why a solve reported Infeasible."""
    STRUCTURAL = "structural"
    LP = "lp"
    CARDINALITY = "cardinality"


class Engine(str, Enum):
    """Which engine produced a solution."""
    EXACT = "exact"
    HEURISTIC = "heuristic"
    ORACLE = "oracle"
    EVALUATE = "evaluate"


class Configuration(BaseModel):
    """First-stage decision: open terminals and established links.

    Terminals are kept sorted and links normalized to ``(k, m)`` with
    ``k < m``, so equal decisions compare and hash equal. Whether every link
    joins two open terminals is checked where the configuration is used, not
    here, so that inconsistent decisions can still be represented and
    reported.
    """
    model_config = ConfigDict(frozen=True)

    open_terminals: Tuple[int, ...] = ()
    links: Tuple[Tuple[int, int], ...] = ()

    @field_validator("open_terminals", mode="before")
    @classmethod
    def _normalize_terminals(cls, value):
        return tuple(sorted(set(int(k) for k in value)))

    @field_validator("links", mode="before")
    @classmethod
    def _normalize_links(cls, value):
        normalized = set()
        for link in value:
            k, m = (int(v) for v in link)
            if k == m:
                raise ValueError(f"link ({k}, {m}) must join two distinct sites")
            normalized.add((min(k, m), max(k, m)))
        return tuple(sorted(normalized))

    @classmethod
    def of(cls, open_terminals=(), links=()) -> "Configuration":
        return cls(open_terminals=tuple(open_terminals), links=tuple(links))

    @property
    def num_open(self) -> int:
        return len(self.open_terminals)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def key(self) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, int], ...]]:
        """Total order used to break ties between equal-cost configurations."""
        return (self.open_terminals, self.links)

    def violations(self, p: int) -> List[str]:
        """Structural problems with this configuration on ``p`` sites."""
        problems = []
        opened = set(self.open_terminals)
        for k in self.open_terminals:
            if not 0 <= k < p:
                problems.append(f"terminal {k} out of range [0, {p})")
        for k, m in self.links:
            for end in (k, m):
                if not 0 <= end < p:
                    problems.append(f"link ({k}, {m}) endpoint {end} out of range [0, {p})")
                elif end not in opened:
                    problems.append(f"link ({k}, {m}) joins closed terminal {end}")
        return problems


class FlowEntry(BaseModel):
    """Goods routed i -> k -> m -> j through the rail network."""
    i: int
    j: int
    k: int
    m: int
    amount: float


class RoadFlow(BaseModel):
    """Goods shipped directly by road from i to j."""
    i: int
    j: int
    amount: float


class CostBreakdown(BaseModel):
    """Objective split into its cost families."""
    routing_road: float = 0.0
    routing_intermodal: float = 0.0
    fixed_cost_total: float = 0.0
    link_cost_total: float = Field(0.0, description="Link (min-links) or handling (handling) cost")

    @property
    def total(self) -> float:
        return self.routing_road + self.routing_intermodal + self.fixed_cost_total + self.link_cost_total


class TracePoint(BaseModel):
    """One entry of an anytime trace."""
    iteration: int
    best_objective: float
    elapsed: float


class SolveMetadata(BaseModel):
    """How a solution was obtained."""
    status: SolveStatus
    engine: Engine
    node_count: int = 0
    lp_count: int = 0
    wall_time: float = 0.0
    best_bound: Optional[float] = None
    gap: Optional[float] = None
    infeasibility: Optional[InfeasibilityKind] = None
    message: Optional[str] = None
    trace: List[TracePoint] = Field(default_factory=list)


class Solution(BaseModel):
    """Configuration, flows, objective and solve metadata.

    Serialized in a stable order: name, variant, status, objective,
    breakdown, configuration, flows, then the metadata with the counts and
    wall time. The leading ``status`` repeats ``metadata.status`` and is
    ignored when a file is read back.
    """
    instance_name: Optional[str] = None
    variant: VariantSpec
    objective: Optional[float] = None
    breakdown: CostBreakdown = Field(default_factory=CostBreakdown)
    configuration: Configuration = Field(default_factory=Configuration)
    intermodal_flows: List[FlowEntry] = Field(default_factory=list)
    road_flows: List[RoadFlow] = Field(default_factory=list)
    metadata: SolveMetadata

    @model_validator(mode="before")
    @classmethod
    def _drop_leading_status(cls, data):
        if isinstance(data, dict) and "status" in data:
            data = {key: value for key, value in data.items() if key != "status"}
        return data

    @model_serializer(mode="wrap")
    def _ordered(self, handler):
        data = handler(self)
        ordered = {}
        for key in ("instance_name", "variant"):
            if key in data:
                ordered[key] = data.pop(key)
        if isinstance(data.get("metadata"), dict) and "status" in data["metadata"]:
            ordered["status"] = data["metadata"]["status"]
        ordered.update(data)
        return ordered

    @property
    def status(self) -> SolveStatus:
        return self.metadata.status

    @property
    def has_objective(self) -> bool:
        return self.objective is not None

    def reported_count(self) -> int:
        """Terminals for base/pl rows, links for min-links/handling rows."""
        if self.variant.kind in (VariantKind.MIN_LINKS, VariantKind.HANDLING):
            return self.configuration.num_links
        return self.configuration.num_open


class BnbParams(BaseModel):
    """Branch-and-bound limits and rules."""
    time_limit: float = Field(3600.0, gt=0.0, description="Seconds")
    node_limit: int = Field(1_000_000, gt=0)
    relative_gap: float = Field(0.0, ge=0.0)
    branching_rule: str = Field("most-fractional")
    node_selection: str = Field("best-bound-plunge")
    integrality_tol: float = Field(1e-6, gt=0.0)
    incumbent_heuristic: bool = True


class Neighborhood(str, Enum):
    """Local search move families."""
    TOGGLE_TERMINAL = "toggle-terminal"
    ADD_REMOVE_LINK = "add-remove-link"
    SWAP_LINK = "swap-link"
    SWAP_TERMINAL = "swap-terminal"


DEFAULT_NEIGHBORHOODS = (
    Neighborhood.TOGGLE_TERMINAL,
    Neighborhood.ADD_REMOVE_LINK,
    Neighborhood.SWAP_LINK,
    Neighborhood.SWAP_TERMINAL,
)


class HeuristicParams(BaseModel):
    """Matheuristic budget and search controls."""
    time_budget: float = Field(5.0, gt=0.0, description="Seconds; a safety cap on top of max_evaluations")
    max_evaluations: int = Field(2000, ge=1, description="Configuration evaluations before stopping")
    max_non_improving: int = Field(5, ge=1, description="Restarts without improvement before stopping")
    neighborhood_order: List[Neighborhood] = Field(default_factory=lambda: list(DEFAULT_NEIGHBORHOODS))
    restarts: int = Field(10, ge=0)
    seed: int = 0
    reference_bound: Optional[float] = Field(None, description="Known optimum or lower bound for gap reporting")


class FeasibilityReport(BaseModel):
    """Residuals of a solution against the model's constraint families."""
    residuals: Dict[str, float] = Field(default_factory=dict)
    worst_location: Dict[str, str] = Field(default_factory=dict)
    violations: List[str] = Field(default_factory=list)
    diagonal_flow: float = 0.0
    prop1_checked: bool = False
    prop1_ok: Optional[bool] = None
    objective_claimed: Optional[float] = None
    objective_recomputed: Optional[float] = None
    objective_ok: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return not self.violations
