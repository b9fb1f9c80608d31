"""Model size statistics, as built and under the literal counting scheme."""
from typing import Dict

from pydantic import BaseModel, Field, model_validator

from models.instance import VariantSpec
from .model import EquationTag, MipModel, VarRole


class ModelStats(BaseModel):
    """Constraint and variable counts of a model."""
    num_constraints: int
    num_variables: int
    num_binaries: int
    constraints_by_tag: Dict[str, int] = Field(default_factory=dict)
    variables_by_role: Dict[str, int] = Field(default_factory=dict)
    closed_form: bool = Field(False, description="Counts follow the closed-form formulas")

    @model_validator(mode="after")
    def _check_totals(self) -> "ModelStats":
        if sum(self.constraints_by_tag.values()) != self.num_constraints:
            raise ValueError("per-equation counts do not add up to num_constraints")
        if self.variables_by_role and sum(self.variables_by_role.values()) != self.num_variables:
            raise ValueError("per-role counts do not add up to num_variables")
        return self


def closed_form_counts(n: int, p: int, variant: VariantSpec) -> ModelStats:
    """Counts under the literal scheme: ordered (k, m) pairs, all customer
    pairs, and one symmetry row per ordered site pair.

    For the base model this gives n^2 p^2 + 3 p^2 + n^2 + p + 1 constraints
    and n^2 p^2 + n^2 + p^2 variables.
    """
    by_tag = {
        EquationTag.EQ2.value: n * n,
        EquationTag.EQ3.value: p,
        EquationTag.EQ4.value: p * p,
        EquationTag.EQ5.value: p * p,
        EquationTag.EQ6.value: p * p,
    }
    if variant.has_link_count:
        by_tag[EquationTag.EQ7.value] = 1
    by_tag[EquationTag.EQ8.value] = n * n * p * p
    if variant.has_terminal_count:
        by_tag[EquationTag.EQ10.value] = 1
    by_role = {
        VarRole.X.value: n * n * p * p,
        VarRole.W.value: n * n,
        VarRole.Z_LINK.value: p * p - p,
        VarRole.Z_SITE.value: p,
    }
    return ModelStats(
        num_constraints=sum(by_tag.values()),
        num_variables=sum(by_role.values()),
        num_binaries=p * p,
        constraints_by_tag=by_tag,
        variables_by_role=by_role,
        closed_form=True,
    )


def model_stats(model: MipModel, closed_form: bool = False) -> ModelStats:
    """Counts of a built model.

    Args:
        model: Any built model
        closed_form: Report the closed-form counts for the model's (n, p)
            and variant instead of the rows actually built

    Returns:
        ModelStats whose per-tag counts sum to the totals
    """
    if closed_form:
        return closed_form_counts(model.n, model.p, model.variant)

    by_tag: Dict[str, int] = {}
    for tag in model.tags:
        by_tag[tag.value] = by_tag.get(tag.value, 0) + 1
    by_role: Dict[str, int] = {}
    for role in model.roles:
        by_role[role.value] = by_role.get(role.value, 0) + 1
    return ModelStats(
        num_constraints=model.num_constraints,
        num_variables=model.num_variables,
        num_binaries=model.num_binaries,
        constraints_by_tag=by_tag,
        variables_by_role=by_role,
    )
