"""Export a model in CPLEX LP text format for cross-checking with external solvers."""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader

from formulation import MipModel, model_stats

logger = logging.getLogger(__name__)


TERMS_PER_LINE = 6


def _number(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() and abs(value) < 1e15 else repr(value)


def _chunks(items: Sequence[str], size: int = TERMS_PER_LINE) -> List[str]:
    return [" ".join(items[start:start + size]) for start in range(0, len(items), size)]


def _linear(terms: Sequence[Tuple[float, str]]) -> List[str]:
    rendered = []
    for coef, name in terms:
        sign = "-" if coef < 0 else "+"
        magnitude = abs(coef)
        rendered.append(f"{sign} {name}" if magnitude == 1.0 else f"{sign} {_number(magnitude)} {name}")
    return _chunks(rendered)


class LpExporter:
    """Renders MipModels through the ``model.lp.j2`` template."""

    def __init__(self):
        self.template_dir = Path(__file__).parent / "templates"
        self.jinja_env = Environment(loader=FileSystemLoader(self.template_dir), keep_trailing_newline=True)
        self.template = self.jinja_env.get_template("model.lp.j2")

    def render(self, model: MipModel, title: Optional[str] = None) -> str:
        """LP text of ``model``; variable names are the model's canonical names."""
        names = model.names
        objective = [(float(c), names[j]) for j, c in enumerate(model.objective) if c != 0.0]

        matrix = model.matrix.tocsr()
        rows = []
        for r in range(model.num_constraints):
            start, end = matrix.indptr[r], matrix.indptr[r + 1]
            terms = [(float(v), names[c]) for c, v in zip(matrix.indices[start:end], matrix.data[start:end])]
            linear = _linear(terms)
            if not linear:
                linear = [f"0 {names[0]}"] if names else ["0"]
            rows.append({
                "name": model.row_names[r],
                "terms": linear,
                "relation": model.relations[r].value,
                "rhs": _number(model.rhs[r]),
            })

        bounds = []
        binaries = []
        for j, name in enumerate(names):
            lower, upper = float(model.lower[j]), float(model.upper[j])
            if model.integral[j] and lower == 0.0 and upper == 1.0:
                binaries.append(name)
            elif lower == upper:
                bounds.append(f"{name} = {_number(lower)}")
            elif np.isfinite(upper):
                bounds.append(f"{_number(lower)} <= {name} <= {_number(upper)}")
            else:
                bounds.append(f"{name} >= {_number(lower)}")

        default_title = f"{model.variant.label()} n={model.n} p={model.p}"
        if model.structurally_infeasible:
            default_title += f" (structurally infeasible: {model.infeasibility_reason})"
        return self.template.render(
            title=title or default_title,
            stats=model_stats(model),
            offset=_number(model.objective_offset) if model.objective_offset else None,
            objective=_linear(objective),
            rows=rows,
            bounds=bounds,
            binaries=_chunks(binaries, 10),
        )

    def export(self, model: MipModel, path: Union[str, Path], title: Optional[str] = None) -> Dict[str, Any]:
        """Write the LP file.

        Returns:
            Result dictionary with ``success``, ``path`` and ``errors``
        """
        result: Dict[str, Any] = {"success": False, "path": None, "errors": []}
        try:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                f.write(self.render(model, title))
            result["path"] = str(path)
            result["success"] = True
            logger.info(f"Exported {model.num_variables} variables, {model.num_constraints} rows to {path}")
        except OSError as e:
            logger.error(f"LP export failed: {e}")
            result["errors"].append(str(e))
        return result


def export_lp(model: MipModel, title: Optional[str] = None) -> str:
    """LP text of a model."""
    return LpExporter().render(model, title)
