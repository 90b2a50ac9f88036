import logging
from enum import Enum

from core.errors import ImputationError, SchemaValidationError
from core.inter_imputer import run_inter
from core.intra_imputer import DEFAULT_POLICY, run_intra
from core.matcher import MatchConfig
from core.schema_model import validate_schema

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    INTRA = "intra"
    INTER = "inter"
    INTRA_INTER_INTRA = "intra-inter-intra"


STEPS = {
    Strategy.INTRA: ("intra",),
    Strategy.INTER: ("inter",),
    Strategy.INTRA_INTER_INTRA: ("intra", "inter", "intra"),
}


def run_strategy(model, strategy=Strategy.INTRA_INTER_INTRA, cfg=None,
                 policy=DEFAULT_POLICY, passes=1, jobs=1):
    """
    Run a strategy's step sequence up to `passes` times.

    Repetition stops early once a full sequence fills nothing.

    Args:
        model: WarehouseModel; tables are modified in place
        strategy: Strategy or its name
        cfg: MatchConfig for inter steps
        policy: DonorPolicy
        passes: Maximum repetitions (>= 1)
        jobs: Worker threads for intra steps

    Returns:
        Fill log in execution order
    """
    strategy = Strategy(strategy)
    cfg = cfg or MatchConfig()
    if passes < 1:
        raise ImputationError(f"passes must be >= 1, got {passes}")

    report = validate_schema(model)
    if not report.ok:
        raise SchemaValidationError(report)

    fills = []
    for n in range(passes):
        before = len(fills)
        for step in STEPS[strategy]:
            if step == "intra":
                fills.extend(run_intra(model, policy, jobs=jobs, validate=False))
            else:
                fills.extend(run_inter(model, cfg, policy, validate=False))
        added = len(fills) - before
        logger.debug("pass %d of %s filled %d cell(s)", n + 1, strategy.value, added)
        if added == 0:
            break
    return fills
