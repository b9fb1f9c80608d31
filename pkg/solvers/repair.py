"""Make a configuration meet a variant's terminal and link counts."""
import logging
from itertools import combinations
from typing import Dict, Iterable, Optional, Set, Tuple

from models.instance import LinkMode, VariantSpec
from models.solution import Configuration

logger = logging.getLogger(__name__)

Link = Tuple[int, int]


class RepairError(Exception):
    """Raised when no configuration can meet the variant's counts."""
    pass


def _best(candidates: Iterable, score):
    """Highest score, ties to the smallest candidate."""
    ranked = sorted(candidates, key=lambda c: (-score(c), c))
    return ranked[0] if ranked else None


def _worst(candidates: Iterable, score):
    """Lowest score, ties to the largest candidate."""
    ranked = sorted(candidates, key=lambda c: (score(c), tuple(-v for v in c) if isinstance(c, tuple) else -c))
    return ranked[0] if ranked else None


def repair_configuration(p: int, variant: VariantSpec, terminals: Iterable[int], links: Iterable[Link],
                         terminal_score: Optional[Dict[int, float]] = None,
                         link_score: Optional[Dict[Link, float]] = None) -> Configuration:
    """Adjust terminals and links until every count row holds.

    Links always pull their endpoints open. With a fixed terminal count the
    lowest-scored terminals are closed (with their links) or the
    highest-scored closed ones opened. Surplus links go lowest score first;
    missing links (exact link count) are added highest score first, opening
    the best closed terminal when the open set has no free pair left.

    Args:
        p: Number of candidate sites
        variant: Counts to satisfy
        terminals: Starting open terminals
        links: Starting links
        terminal_score: Preference for keeping a terminal open
        link_score: Preference for keeping a link

    Raises:
        RepairError: If the counts cannot be met on p sites
    """
    t_score = terminal_score or {}
    l_score = link_score or {}

    def tscore(k):
        return t_score.get(k, 0.0)

    def lscore(link):
        return l_score.get(link, 0.0)

    opened: Set[int] = {k for k in terminals if 0 <= k < p}
    chosen: Set[Link] = set()
    for k, m in links:
        if k != m and 0 <= k < p and 0 <= m < p:
            chosen.add((min(k, m), max(k, m)))
    for link in chosen:
        opened.update(link)

    if variant.has_terminal_count:
        q = variant.q_terminals
        if q > p:
            raise RepairError(f"{q} terminals requested on {p} sites")
        while len(opened) > q:
            drop = _worst(opened, tscore)
            opened.discard(drop)
            chosen = {link for link in chosen if drop not in link}
        while len(opened) < q:
            opened.add(_best(set(range(p)) - opened, tscore))

    if variant.has_link_count:
        l = variant.l
        while len(chosen) > l:
            chosen.discard(_worst(chosen, lscore))
        if variant.link_mode == LinkMode.EXACT:
            while len(chosen) < l:
                free = [link for link in combinations(sorted(opened), 2) if link not in chosen]
                if free:
                    chosen.add(_best(free, lscore))
                    continue
                closed = set(range(p)) - opened
                if variant.has_terminal_count or not closed:
                    raise RepairError(f"cannot place {l} links on {len(opened)} open terminals")
                opened.add(_best(closed, tscore))

    return Configuration.of(sorted(opened), sorted(chosen))
