"""Instance labels in the benchmark tables' style.

``10C10L2TL``    10 customers, 10 sites, 2 links
``20C20L8T``     20 customers, 20 sites, 8 terminals
``10C10L4T4TL``  10 customers, 10 sites, 4 terminals and 4 links
"""
import re
from typing import Dict, NamedTuple, Tuple, Union

from models.instance import VariantKind, VariantSpec

TAG_LINKS = "TL"
TAG_TERMINALS = "T"
TAG_COMBINED = "T..TL"

NameValue = Union[int, Dict[str, int]]


class NameParseError(Exception):
    """Raised when an instance label cannot be parsed."""
    pass


class InstanceName(NamedTuple):
    n: int
    p: int
    value: NameValue
    tag: str


def encode_name(n: int, p: int, value: Union[int, Tuple[int, int], Dict[str, int]], tag: str) -> str:
    """Render an instance label.

    Args:
        n: Customer count
        p: Site count
        value: Link count (``TL``), terminal count (``T``), or
            ``(terminals, links)`` / ``{"terminals": q, "links": l}`` for ``T..TL``
        tag: One of ``TL``, ``T``, ``T..TL``

    Returns:
        The label, e.g. ``10C10L2TL``
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    prefix = f"{n}C{p}L"
    if tag == TAG_COMBINED:
        if isinstance(value, dict):
            q, l = value["terminals"], value["links"]
        else:
            q, l = value
        _check_count(q)
        _check_count(l)
        return f"{prefix}{q}T{l}TL"
    if tag not in (TAG_LINKS, TAG_TERMINALS):
        raise ValueError(f"unknown tag {tag!r}")
    _check_count(value)
    return f"{prefix}{value}{tag}"


def name_for_variant(n: int, p: int, variant: VariantSpec) -> str:
    """Label of a variant's table row: ``TL`` for base and handling, ``T`` for
    min-links, ``T..TL`` for pl."""
    if variant.kind == VariantKind.MIN_LINKS:
        return encode_name(n, p, variant.q_terminals, TAG_TERMINALS)
    if variant.kind == VariantKind.PL:
        return encode_name(n, p, (variant.q_terminals, variant.l), TAG_COMBINED)
    return encode_name(n, p, variant.l, TAG_LINKS)


def _check_count(value) -> None:
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"counts must be nonnegative integers, got {value!r}")


NAME_PATTERN = re.compile(r"(\d+)C(\d+)L(\d+)(TL|T(\d+)TL|T)")
# Longest well-formed prefix; the number of groups it fills says what is expected next.
_PREFIX_PATTERN = re.compile(r"(?:(\d+)(?:(C)(?:(\d+)(?:(L)(\d+)?)?)?)?)?")
_EXPECTED = (
    "customer count",
    "'C' after the customer count",
    "site count",
    "'L' after the site count",
    "link or terminal count",
    "'T' after the count",
)


def _token(text: str, pos: int) -> str:
    return "end of name" if pos >= len(text) else repr(text[pos:])


def parse_name(name: str) -> InstanceName:
    """Parse an instance label back into its parts.

    Raises:
        NameParseError: Naming the offending token
    """
    text = name.strip()
    match = NAME_PATTERN.fullmatch(text)
    if match is None:
        head = NAME_PATTERN.match(text)
        if head is not None:
            raise NameParseError(f"unexpected trailing token {_token(text, head.end())} in {name!r}")
        prefix = _PREFIX_PATTERN.match(text)
        filled = sum(group is not None for group in prefix.groups())
        raise NameParseError(
            f"expected {_EXPECTED[filled]} at position {prefix.end()} of {text!r}, "
            f"found {_token(text, prefix.end())}"
        )
    n, p, first, tag, links = match.groups()
    if tag == "T":
        return InstanceName(int(n), int(p), int(first), TAG_TERMINALS)
    if tag == "TL":
        return InstanceName(int(n), int(p), int(first), TAG_LINKS)
    return InstanceName(int(n), int(p), {"terminals": int(first), "links": int(links)}, TAG_COMBINED)
