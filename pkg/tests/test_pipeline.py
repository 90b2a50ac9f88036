import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dimension, make_model, random_model
from core.errors import SchemaValidationError
from core.intra_imputer import FillSource
from core.matcher import MatchConfig
from core.pipeline import Strategy, run_strategy
from core.schema_model import Hierarchy
from reference_impl import reference_strategy


def _log(fills):
    return [
        (f.target.dimension, f.target.row_index, f.target.attribute, f.value,
         f.donor_row, f.donor_match_attribute, f.source.value)
        for f in fills
    ]


@given(st.integers(min_value=0, max_value=2**32 - 1),
       st.sampled_from([s.value for s in Strategy]))
@settings(max_examples=50, deadline=None)
def test_engine_matches_naive_transcription(seed, strategy):
    engine_model = random_model(seed)
    naive_model = engine_model.clone()
    cfg = MatchConfig()

    engine = _log(run_strategy(engine_model, strategy, cfg))
    naive = reference_strategy(naive_model, strategy, cfg)

    assert engine == naive
    for a, b in zip(engine_model.dimensions, naive_model.dimensions):
        assert a.table == b.table


def test_second_intra_pass_uses_inter_fills():
    home = make_dimension("Home", ["H_Key", "H_Town", "H_Dept", "H_Region"],
                          [["h1", "T1", "D1", None], ["h2", "T2", "D1", None]],
                          [Hierarchy("G", ["H_Key", "H_Town", "H_Dept", "H_Region"])])
    away = make_dimension("Away", ["A_Key", "A_Town", "A_Region"],
                          [["a1", "T1", "R1"]],
                          [Hierarchy("G", ["A_Key", "A_Town", "A_Region"])])
    model = make_model(home, away)
    fills = run_strategy(model, Strategy.INTRA_INTER_INTRA, MatchConfig())
    # h2 shares only its department with h1, whose region comes from Away
    assert [(f.target.row_index, f.value, f.source) for f in fills] == [
        (0, "R1", FillSource.INTER),
        (1, "R1", FillSource.INTRA),
    ]
    assert fills[1].donor_match_attribute == "H_Dept"


def test_intra_only_leaves_cross_dimension_gaps():
    home = make_dimension("Home", ["H_Key", "H_Town", "H_Region"],
                          [["h1", "T1", None]],
                          [Hierarchy("G", ["H_Key", "H_Town", "H_Region"])])
    away = make_dimension("Away", ["A_Key", "A_Town", "A_Region"],
                          [["a1", "T1", "R1"]],
                          [Hierarchy("G", ["A_Key", "A_Town", "A_Region"])])
    assert run_strategy(make_model(home, away), Strategy.INTRA) == []


def test_passes_stop_when_nothing_changes(geo_model):
    once = run_strategy(geo_model.clone(), Strategy.INTRA, passes=1)
    many = run_strategy(geo_model, Strategy.INTRA, passes=5)
    assert _log(once) == _log(many)


def test_invalid_schema_aborts_before_changes():
    d = make_dimension("D", ["Id", "City", "Region"], [["1", "a", None], ["2", "a", "r"]],
                       [Hierarchy("H", ["Id", "City", "Region"], {"City": ["Region"]})])
    with pytest.raises(SchemaValidationError):
        run_strategy(make_model(d), Strategy.INTRA)
    assert d.table.get(0, "Region") is None
