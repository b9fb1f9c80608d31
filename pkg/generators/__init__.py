"""Generators package for benchmark instances, instance labels and LP text.

This package contains the seeded instance generator, the table-style
instance naming scheme and the CPLEX-LP exporter.
"""

from .instance_gen import GenSpec, UniformStream, generate, generate_handling_costs
from .lp_export import LpExporter, export_lp
from .names import (
    TAG_COMBINED, TAG_LINKS, TAG_TERMINALS, InstanceName, NameParseError, encode_name, name_for_variant,
    parse_name,
)

__all__ = [
    "GenSpec",
    "UniformStream",
    "generate",
    "generate_handling_costs",
    "LpExporter",
    "export_lp",
    "TAG_COMBINED",
    "TAG_LINKS",
    "TAG_TERMINALS",
    "InstanceName",
    "NameParseError",
    "encode_name",
    "name_for_variant",
    "parse_name",
]
