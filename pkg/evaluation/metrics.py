from dataclasses import dataclass, field

from core.errors import ProtocolError


def ratio(numerator, denominator):
    """numerator / denominator, or None when undefined."""
    if denominator == 0:
        return None
    return numerator / denominator


@dataclass
class AttributeScore:
    dimension: str
    attribute: str
    missing: int = 0
    replaced: int = 0
    scored: int = 0   # fills whose original value is known
    correct: int = 0

    @property
    def imputation_rate(self):
        return ratio(self.replaced, self.missing)

    @property
    def accuracy(self):
        return ratio(self.correct, self.scored)


@dataclass
class TrialReport:
    """
    Metrics of one inject + impute + score trial.

    Per-attribute counts plus pooled metrics; runtime covers the
    imputation call only.
    """
    attributes: dict = field(default_factory=dict)
    runtime: float = 0.0

    def _total(self, name):
        return sum(getattr(s, name) for s in self.attributes.values())

    @property
    def missing(self):
        return self._total("missing")

    @property
    def replaced(self):
        return self._total("replaced")

    @property
    def scored(self):
        return self._total("scored")

    @property
    def correct(self):
        return self._total("correct")

    @property
    def imputation_rate(self):
        return ratio(self.replaced, self.missing)

    @property
    def accuracy(self):
        return ratio(self.correct, self.scored)


def score(fills, truth, case_insensitive=False):
    """
    Compare fills against the original values of the injected cells.

    Args:
        fills: Iterable of FillRecord
        truth: GroundTruth
        case_insensitive: Compare values casefolded

    Returns:
        TrialReport (runtime left at 0)

    Raises:
        ProtocolError: a fill targets a cell that is not in the truth
    """
    report = TrialReport()

    def slot(addr):
        key = (addr.dimension, addr.attribute)
        if key not in report.attributes:
            report.attributes[key] = AttributeScore(addr.dimension, addr.attribute)
        return report.attributes[key]

    for addr in truth.entries:
        slot(addr).missing += 1

    fold = (lambda v: v.casefold()) if case_insensitive else (lambda v: v)
    for fill in fills:
        addr = fill.target
        if addr not in truth.entries:
            raise ProtocolError(
                f"fill at {addr.dimension}.{addr.attribute} row {addr.row_index} "
                f"was not an injected cell"
            )
        s = slot(addr)
        s.replaced += 1
        original = truth.entries[addr]
        if original is None:
            continue
        s.scored += 1
        if fold(fill.value) == fold(original):
            s.correct += 1

    report.attributes = dict(sorted(report.attributes.items()))
    return report
