"""
Multidimensional warehouse model: warehouse, dimensions, hierarchies.

A hierarchy lists its parameters finest-first, so list order is the
roll-up order. Schemas are immutable; the instance tables they point at
are not.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType

import jsonschema

from core.errors import (
    SchemaConfigError,
    UnknownAttributeError,
    UnknownParameterError,
)
from core.table_store import DEFAULT_NULL_TOKENS, load_table, write_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactDescriptor:
    name: str


@dataclass(frozen=True)
class GranularityLevel:
    hierarchy: str
    index: int


@dataclass(frozen=True)
class Hierarchy:
    """
    Ordered parameter chain with per-parameter weak attributes.

    parameters[0] is the dimension identifier; parameters[i] rolls up
    to parameters[j] for every i < j.
    """
    name: str
    parameters: tuple
    weak: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(
            self,
            "weak",
            MappingProxyType({p: tuple(ws) for p, ws in dict(self.weak).items()}),
        )

    def __hash__(self):
        return hash((self.name, self.parameters, tuple(sorted(self.weak.items()))))

    def index(self, parameter):
        try:
            return self.parameters.index(parameter)
        except ValueError:
            raise UnknownParameterError(
                f"{parameter!r} is not a parameter of hierarchy {self.name!r}"
            ) from None

    def weak_of(self, parameter):
        return self.weak.get(parameter, ())

    def owner_of_weak(self, attribute):
        """Parameter a weak attribute belongs to, or None."""
        for p in self.parameters:
            if attribute in self.weak_of(p):
                return p
        return None

    def attributes(self):
        """Every attribute the hierarchy mentions, parameters first."""
        seen = list(self.parameters)
        for p in self.parameters:
            for w in self.weak_of(p):
                if w not in seen:
                    seen.append(w)
        for p, ws in self.weak.items():
            for w in (p, *ws):
                if w not in seen:
                    seen.append(w)
        return seen


@dataclass(frozen=True)
class Dimension:
    name: str
    attributes: tuple
    id_attribute: str
    hierarchies: tuple = ()
    table: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "hierarchies", tuple(self.hierarchies))

    def hierarchy(self, name):
        for h in self.hierarchies:
            if h.name == name:
                return h
        raise UnknownAttributeError(f"dimension {self.name!r} has no hierarchy {name!r}")


@dataclass(frozen=True)
class WarehouseModel:
    name: str
    dimensions: tuple
    facts: tuple = ()
    star: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        object.__setattr__(self, "facts", tuple(self.facts))
        object.__setattr__(
            self,
            "star",
            MappingProxyType({f: frozenset(ds) for f, ds in dict(self.star).items()}),
        )

    def dimension(self, name):
        for d in self.dimensions:
            if d.name == name:
                return d
        raise UnknownAttributeError(f"warehouse {self.name!r} has no dimension {name!r}")

    def clone(self):
        """Same schema, private copies of every instance table."""
        dims = [
            replace(d, table=d.table.copy() if d.table is not None else None)
            for d in self.dimensions
        ]
        return replace(self, dimensions=tuple(dims))

    def signature(self):
        """Stable digest of the schema structure (tables excluded)."""
        payload = {
            "name": self.name,
            "dimensions": [
                {
                    "name": d.name,
                    "id": d.id_attribute,
                    "attributes": list(d.attributes),
                    "hierarchies": [
                        {
                            "name": h.name,
                            "parameters": list(h.parameters),
                            "weak": {p: list(ws) for p, ws in sorted(h.weak.items())},
                        }
                        for h in d.hierarchies
                    ],
                }
                for d in self.dimensions
            ],
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


# ============================================================================
# Validation
# ============================================================================

@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    dimension: str = ""
    hierarchy: str = ""
    attribute: str = ""

    def describe(self):
        coords = ".".join(x for x in (self.dimension, self.hierarchy, self.attribute) if x)
        return f"[{self.code}] {coords}: {self.message}" if coords else f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate_schema(model):
    """
    Check a warehouse model against the structural invariants.

    Returns:
        ValidationReport; empty means valid. The model is not modified.
    """
    found = []

    def add(code, message, dimension="", hierarchy="", attribute=""):
        found.append(Violation(code, message, dimension, hierarchy, attribute))

    names = [d.name for d in model.dimensions]
    for name in sorted({n for n in names if names.count(n) > 1}):
        add("duplicate-dimension", "dimension name declared more than once", dimension=name)

    for fact in model.facts:
        if not fact.name:
            add("empty-fact", "fact name is empty")
    for fact_name, dims in sorted(model.star.items()):
        for dim in sorted(dims):
            if dim not in names:
                add("unknown-star-dimension",
                    f"fact {fact_name!r} links undeclared dimension {dim!r}",
                    dimension=dim)

    for d in model.dimensions:
        _validate_dimension(d, add)

    return ValidationReport(tuple(found))


def _validate_dimension(d, add):
    attrs = list(d.attributes)
    for a in sorted({a for a in attrs if attrs.count(a) > 1}):
        add("duplicate-attribute", "attribute declared more than once", d.name, attribute=a)
    if d.id_attribute not in attrs:
        add("unknown-identifier", "identifier is not a declared attribute",
            d.name, attribute=d.id_attribute)

    h_names = [h.name for h in d.hierarchies]
    for n in sorted({n for n in h_names if h_names.count(n) > 1}):
        add("duplicate-hierarchy", "hierarchy name declared more than once", d.name, n)

    for h in d.hierarchies:
        if not h.parameters:
            add("empty-hierarchy", "hierarchy has no parameters", d.name, h.name)
            continue
        if h.parameters[0] != d.id_attribute:
            add("bad-finest-parameter",
                f"first parameter {h.parameters[0]!r} is not the identifier {d.id_attribute!r}",
                d.name, h.name, h.parameters[0])
        params = list(h.parameters)
        for p in sorted({p for p in params if params.count(p) > 1}):
            add("duplicate-parameter", "parameter listed more than once", d.name, h.name, p)
        for a in h.attributes():
            if a not in attrs:
                add("unknown-attribute", "hierarchy references an undeclared attribute",
                    d.name, h.name, a)

        owners = {}
        for p, ws in h.weak.items():
            if p not in params:
                add("weak-without-parameter", "weak attributes attached to a non-parameter",
                    d.name, h.name, p)
            for w in ws:
                if w in params:
                    add("parameter-weak-overlap",
                        "attribute is both a parameter and a weak attribute",
                        d.name, h.name, w)
                owners.setdefault(w, []).append(p)
        for w, ps in sorted(owners.items()):
            if len(ps) > 1:
                add("weak-multiple-parameters",
                    f"weak attribute attached to parameters {sorted(ps)}",
                    d.name, h.name, w)

    table = d.table
    if table is None:
        return
    for a in attrs:
        if not table.has_column(a):
            add("missing-column", "attribute has no column in the instance table",
                d.name, attribute=a)
    if table.has_column(d.id_attribute):
        ids = table.column(d.id_attribute)
        if any(v is None for v in ids):
            add("null-identifier", "identifier column contains nulls",
                d.name, attribute=d.id_attribute)
        present = [v for v in ids if v is not None]
        if len(set(present)) != len(present):
            add("duplicate-identifier", "identifier values are not unique",
                d.name, attribute=d.id_attribute)


# ============================================================================
# Hierarchy navigation
# ============================================================================

def lower_parameters(h, p):
    """
    Parameters strictly below p, nearest-lower first.

    Example: <id, City, State, Country>, Country -> [State, City, id]
    """
    idx = h.index(p)
    return list(reversed(h.parameters[:idx]))


def level_of(h, a):
    """Granularity level of a parameter or of a weak attribute's parameter."""
    if a in h.parameters:
        return GranularityLevel(h.name, h.parameters.index(a))
    owner = h.owner_of_weak(a)
    if owner is None or owner not in h.parameters:
        raise UnknownAttributeError(f"{a!r} does not belong to hierarchy {h.name!r}")
    return GranularityLevel(h.name, h.parameters.index(owner))


# ============================================================================
# Schema files
# ============================================================================

SCHEMA_FILE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "dimensions"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "dimensions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "id", "attributes", "hierarchies", "table"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "id": {"type": "string", "minLength": 1},
                    "attributes": {"type": "array", "items": {"type": "string"}},
                    "table": {"type": "string", "minLength": 1},
                    "hierarchies": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["name", "parameters"],
                            "properties": {
                                "name": {"type": "string", "minLength": 1},
                                "parameters": {"type": "array", "items": {"type": "string"}},
                                "weak": {
                                    "type": "object",
                                    "additionalProperties": {
                                        "type": "array",
                                        "items": {"type": "string"},
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
        "facts": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name"],
                "properties": {
                    "name": {"type": "string"},
                    "dimensions": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}


def json_pointer(path):
    return "/" + "/".join(str(p) for p in path)


def check_document(document, schema, source):
    """Validate a parsed JSON document, raising with a pointer to the first error."""
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaConfigError(f"{source}: {err.message}", json_pointer(err.absolute_path))


def read_json(path):
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaConfigError(f"{path}: invalid JSON ({e.msg}, line {e.lineno})") from e


def model_from_document(document, tables=None):
    """
    Build a WarehouseModel from a parsed schema document.

    Args:
        document: Parsed JSON (already checked against SCHEMA_FILE_SCHEMA)
        tables: Optional mapping dimension name -> InstanceTable
    """
    tables = tables or {}
    dims = []
    for dd in document["dimensions"]:
        hierarchies = [
            Hierarchy(hd["name"], hd["parameters"], hd.get("weak", {}))
            for hd in dd["hierarchies"]
        ]
        dims.append(
            Dimension(
                name=dd["name"],
                attributes=dd["attributes"],
                id_attribute=dd["id"],
                hierarchies=hierarchies,
                table=tables.get(dd["name"]),
            )
        )
    facts = [FactDescriptor(fd["name"]) for fd in document.get("facts", [])]
    star = {fd["name"]: fd.get("dimensions", []) for fd in document.get("facts", [])}
    return WarehouseModel(document["name"], dims, facts, star)


def load_schema(path, null_tokens=DEFAULT_NULL_TOKENS, load_tables=True):
    """
    Load a warehouse schema file and, optionally, its instance tables.

    Args:
        path: JSON schema file
        null_tokens: Passed to load_table
        load_tables: When False the dimensions carry no table

    Returns:
        WarehouseModel
    """
    path = Path(path)
    document = read_json(path)
    check_document(document, SCHEMA_FILE_SCHEMA, path)

    tables = {}
    if load_tables:
        for dd in document["dimensions"]:
            table_path = path.parent / dd["table"]
            tables[dd["name"]] = load_table(table_path, null_tokens, name=dd["name"])
    model = model_from_document(document, tables)
    logger.info("loaded warehouse %s with %d dimension(s)", model.name, len(model.dimensions))
    return model


def table_paths_from(path):
    """Dimension name -> table path as written in a schema file."""
    document = read_json(path)
    check_document(document, SCHEMA_FILE_SCHEMA, path)
    return {dd["name"]: dd["table"] for dd in document["dimensions"]}


def dump_schema(model, path, table_paths=None, write_tables=True):
    """
    Write a model as a schema file, tables next to it.

    Args:
        model: WarehouseModel
        path: Destination JSON file
        table_paths: dimension name -> relative CSV path (default "<name>.csv")
        write_tables: Also write each dimension's table
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table_paths = table_paths or {}

    document = {"name": model.name, "dimensions": [], "facts": []}
    for d in model.dimensions:
        rel = table_paths.get(d.name, f"{d.name}.csv")
        document["dimensions"].append({
            "name": d.name,
            "id": d.id_attribute,
            "attributes": list(d.attributes),
            "hierarchies": [
                {
                    "name": h.name,
                    "parameters": list(h.parameters),
                    "weak": {p: list(ws) for p, ws in h.weak.items()},
                }
                for h in d.hierarchies
            ],
            "table": rel,
        })
        if write_tables and d.table is not None:
            write_table(d.table, path.parent / rel)
    for fact in model.facts:
        document["facts"].append({
            "name": fact.name,
            "dimensions": sorted(model.star.get(fact.name, ())),
        })

    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    return path
