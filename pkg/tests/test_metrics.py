from fractions import Fraction

import pytest

from core.errors import ProtocolError
from core.intra_imputer import FillRecord, FillSource
from core.table_store import CellAddress
from evaluation.injector import GroundTruth
from evaluation.metrics import AttributeScore, ratio, score


def cell(row, attr="Region", dim="Geo"):
    return CellAddress(dim, row, attr)


def fill(row, value, attr="Region", dim="Geo"):
    return FillRecord(cell(row, attr, dim), value, 0, "City", FillSource.INTRA)


def truth(**rows):
    """truth(r0="A", r3=None) -> GroundTruth over Geo.Region."""
    return GroundTruth({cell(int(k[1:])): v for k, v in rows.items()}, len(rows))


# (fills, truth, expected imputation rate, expected accuracy)
FIXTURES = [
    ([], truth(r0="A"), Fraction(0), None),
    ([fill(0, "A")], truth(r0="A"), Fraction(1), Fraction(1)),
    ([fill(0, "B")], truth(r0="A"), Fraction(1), Fraction(0)),
    ([fill(0, "A")], truth(r0="A", r1="B"), Fraction(1, 2), Fraction(1)),
    ([fill(0, "A"), fill(1, "X")], truth(r0="A", r1="B"), Fraction(1), Fraction(1, 2)),
    ([fill(0, "A"), fill(1, "B"), fill(2, "C")], truth(r0="A", r1="B", r2="C"), Fraction(1), Fraction(1)),
    ([fill(1, "B")], truth(r0="A", r1="B", r2="C"), Fraction(1, 3), Fraction(1)),
    ([fill(0, "a")], truth(r0="A"), Fraction(1), Fraction(0)),
    ([fill(0, "A"), fill(1, "A"), fill(2, "A")], truth(r0="A", r1="B", r2="B"), Fraction(1), Fraction(1, 3)),
    ([fill(0, "A"), fill(1, "B")], truth(r0="A", r1="B", r2="C", r3="D"), Fraction(1, 2), Fraction(1)),
    ([fill(0, "X"), fill(3, "D")], truth(r0="A", r1="B", r2="C", r3="D"), Fraction(1, 2), Fraction(1, 2)),
    ([fill(i, "v") for i in range(7)], truth(**{f"r{i}": "v" for i in range(10)}), Fraction(7, 10), Fraction(1)),
    ([fill(i, "v" if i % 3 else "w") for i in range(9)], truth(**{f"r{i}": "v" for i in range(9)}),
     Fraction(1), Fraction(6, 9)),
    ([fill(0, "A")], truth(r0="A", r1=None), Fraction(1, 2), Fraction(1)),
    ([fill(1, "Z")], truth(r0="A", r1=None), Fraction(1, 2), None),
    ([fill(0, "A"), fill(1, "Z")], truth(r0="A", r1=None), Fraction(1), Fraction(1)),
    ([], truth(r0=None), Fraction(0), None),
    ([fill(0, "A "), fill(1, "B")], truth(r0="A", r1="B"), Fraction(1), Fraction(1, 2)),
    ([fill(i, "x") for i in range(0, 20, 2)], truth(**{f"r{i}": "x" for i in range(20)}),
     Fraction(1, 2), Fraction(1)),
    ([fill(i, "x" if i < 13 else "y") for i in range(17)], truth(**{f"r{i}": "x" for i in range(19)}),
     Fraction(17, 19), Fraction(13, 17)),
]


@pytest.mark.parametrize("fills,gt,rate,accuracy", FIXTURES)
def test_score_matches_hand_computation(fills, gt, rate, accuracy):
    report = score(fills, gt)
    assert report.imputation_rate == pytest.approx(float(rate), abs=1e-12)
    if accuracy is None:
        assert report.accuracy is None
    else:
        assert report.accuracy == pytest.approx(float(accuracy), abs=1e-12)


def test_fill_outside_truth_is_a_protocol_error():
    with pytest.raises(ProtocolError):
        score([fill(5, "A")], truth(r0="A"))


def test_case_insensitive_scoring():
    report = score([fill(0, "paris")], truth(r0="Paris"), case_insensitive=True)
    assert report.accuracy == 1.0


def test_per_attribute_breakdown():
    gt = GroundTruth({cell(0): "A", cell(0, "Country"): "FR", cell(1, "Country"): "FR"}, 3)
    report = score([fill(0, "A"), fill(1, "DE", "Country")], gt)
    region = report.attributes[("Geo", "Region")]
    country = report.attributes[("Geo", "Country")]
    assert (region.missing, region.replaced, region.correct) == (1, 1, 1)
    assert (country.missing, country.replaced, country.correct) == (2, 1, 0)
    assert report.imputation_rate == pytest.approx(2 / 3, abs=1e-12)
    assert report.accuracy == pytest.approx(1 / 2, abs=1e-12)


def test_undefined_ratios():
    assert ratio(0, 0) is None
    assert AttributeScore("Geo", "Region").accuracy is None
