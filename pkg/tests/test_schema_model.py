import json

import pytest

from conftest import N, customer_dimension, make_dimension, make_model
from core.errors import SchemaConfigError, UnknownParameterError
from core.schema_model import (
    Hierarchy,
    dump_schema,
    level_of,
    load_schema,
    lower_parameters,
    validate_schema,
)


def _codes(model):
    return sorted(v.code for v in validate_schema(model))


def test_valid_model_has_no_violations(geo_model):
    report = validate_schema(geo_model)
    assert report.ok and len(report) == 0


def test_lower_parameters_nearest_first():
    h = Hierarchy("Geo", ["Id", "City", "State", "Country"])
    assert lower_parameters(h, "Country") == ["State", "City", "Id"]
    assert lower_parameters(h, "Id") == []
    with pytest.raises(UnknownParameterError):
        lower_parameters(h, "Planet")


def test_level_of_weak_attribute_is_its_parameter_level():
    h = Hierarchy("Geo", ["Id", "City", "State"], {"State": ["StateName"]})
    assert level_of(h, "StateName").index == 2
    assert level_of(h, "City").index == 1


def test_parameter_weak_overlap():
    d = make_dimension("D", ["Id", "City", "State"], [["1", "a", "b"]],
                       [Hierarchy("H", ["Id", "City", "State"], {"City": ["State"]})])
    assert "parameter-weak-overlap" in _codes(make_model(d))


def test_first_parameter_must_be_identifier():
    d = make_dimension("D", ["Id", "City"], [["1", "a"]], [Hierarchy("H", ["City", "Id"])])
    assert _codes(make_model(d)) == ["bad-finest-parameter"]


@pytest.mark.parametrize("hierarchy,code", [
    (Hierarchy("H", []), "empty-hierarchy"),
    (Hierarchy("H", ["Id", "City", "City"]), "duplicate-parameter"),
    (Hierarchy("H", ["Id", "Town"]), "unknown-attribute"),
    (Hierarchy("H", ["Id", "City"], {"Name": ["City"]}), "weak-without-parameter"),
])
def test_hierarchy_violations(hierarchy, code):
    d = make_dimension("D", ["Id", "City", "Name"], [["1", "a", "n"]], [hierarchy])
    assert code in _codes(make_model(d))


def test_weak_attribute_on_two_parameters():
    d = make_dimension("D", ["Id", "City", "State", "Label"], [["1", "a", "b", "l"]],
                       [Hierarchy("H", ["Id", "City", "State"],
                                  {"City": ["Label"], "State": ["Label"]})])
    assert "weak-multiple-parameters" in _codes(make_model(d))


def test_identifier_column_must_be_unique_and_present():
    d = make_dimension("D", ["Id", "City"], [["1", "a"], ["1", "b"], [N, "c"]],
                       [Hierarchy("H", ["Id", "City"])])
    assert _codes(make_model(d)) == ["duplicate-identifier", "null-identifier"]


def test_star_must_reference_declared_dimensions():
    model = make_model(customer_dimension())
    model = type(model)(model.name, model.dimensions, model.facts, {"Sales": ["Customer", "Ghost"]})
    assert _codes(model) == ["unknown-star-dimension"]


def test_duplicate_dimension_names():
    assert "duplicate-dimension" in _codes(make_model(customer_dimension(), customer_dimension()))


def test_validation_does_not_modify_model(geo_model):
    before = geo_model.signature()
    rows = [list(r) for r in geo_model.dimension("Customer").table.rows]
    validate_schema(geo_model)
    assert geo_model.signature() == before
    assert geo_model.dimension("Customer").table.rows == rows


def test_clone_copies_tables_but_not_schema(geo_model):
    copy = geo_model.clone()
    copy.dimension("Customer").table.rows[1][2] = "X"
    assert geo_model.dimension("Customer").table.get(1, "State") is None
    assert copy.signature() == geo_model.signature()


def test_load_schema_resolves_tables(schema_dir):
    model = load_schema(schema_dir / "schema.json")
    d = model.dimension("Customer")
    assert d.table.get(1, "State") is None
    assert d.table.get(0, "StateName") == "Ile-de-France"
    assert d.hierarchies[0].weak_of("City") == ("CityLabel",)
    assert validate_schema(model).ok


def test_unknown_field_reported_with_pointer(schema_dir):
    path = schema_dir / "schema.json"
    document = json.loads(path.read_text(encoding="utf-8"))
    document["dimensions"][0]["hierarchies"][0]["colour"] = "red"
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(SchemaConfigError) as info:
        load_schema(path)
    assert info.value.pointer == "/dimensions/0/hierarchies/0"


def test_garbled_json(tmp_path):
    path = tmp_path / "schema.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemaConfigError):
        load_schema(path)


def test_dump_then_load_keeps_structure(geo_model, tmp_path):
    path = dump_schema(geo_model, tmp_path / "out" / "schema.json")
    loaded = load_schema(path)
    assert loaded.signature() == geo_model.signature()
    assert loaded.dimension("Customer").table == geo_model.dimension("Customer").table
