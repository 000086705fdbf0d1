from .dce import dead_code_eliminate
from .fold import constant_fold
from .keys import propagate_keys, reachable_output_keys
from .manager import DEFAULT_PIPELINE, PASSES, parse_pass_list, run_pipeline
from .pre import insert_pre
from .rebalance import rebalance
from .report import PassReport

__all__ = [
    "DEFAULT_PIPELINE", "PASSES", "PassReport", "constant_fold", "dead_code_eliminate",
    "insert_pre", "parse_pass_list", "propagate_keys", "reachable_output_keys",
    "rebalance", "run_pipeline",
]
