"""Fixed-order pass pipeline with verification between passes."""
from __future__ import annotations

from typing import Callable, Sequence

from ..errors import ConfigError
from ..heir import CompGraph
from .dce import dead_code_eliminate
from .fold import constant_fold
from .pre import insert_pre
from .rebalance import rebalance
from .report import PassReport

PASSES: dict[str, Callable[[CompGraph], PassReport]] = {
    "fold": constant_fold,
    "dce": dead_code_eliminate,
    "rebalance": rebalance,
    "pre": insert_pre,
}
DEFAULT_PIPELINE = ("fold", "dce", "rebalance", "pre", "dce")


def parse_pass_list(text: str) -> list[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    unknown = [n for n in names if n not in PASSES]
    if unknown:
        raise ConfigError(f"unknown pass {unknown[0]!r}; choose from {', '.join(PASSES)}")
    return names


def run_pipeline(g: CompGraph, passes: Sequence[str] | None = None,
                 naive: bool = False, verify_each: bool = True) -> list[PassReport]:
    """Run passes in order, verifying the graph after each one.

    ``naive`` replaces the whole pipeline by eager PRE placement on inputs.
    With ``verify_each=False`` only the final graph is verified.
    """
    if naive:
        report = insert_pre(g, naive=True)
        g.verify(keyed=True)
        return [report]
    reports = []
    keyed = False
    for name in DEFAULT_PIPELINE if passes is None else passes:
        if name not in PASSES:
            raise ConfigError(f"unknown pass {name!r}")
        reports.append(PASSES[name](g))
        keyed = keyed or name == "pre"
        if verify_each:
            g.verify(keyed=keyed)
    if not verify_each:
        g.verify(keyed=keyed)
    return reports


def has_pre(reports: Sequence[PassReport]) -> bool:
    return any(r.name.startswith("pre") for r in reports)
