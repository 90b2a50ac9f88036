"""
Inter-dimension imputation.

Dimensions that carry semantically identical parameters can repair each
other: a null home parameter is filled from a foreign row whose value at
a lower foreign parameter equals the home row's value at the home
attribute matched to that foreign parameter.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from core.errors import SchemaValidationError, StaleLinkError
from core.intra_imputer import DEFAULT_POLICY, DonorIndex, FillRecord, FillSource
from core.matcher import MatchConfig, attributes_match, best_match
from core.schema_model import lower_parameters, validate_schema
from core.table_store import CellAddress, missing_cells

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ParameterRef:
    dimension: str
    hierarchy: str
    parameter: str


@dataclass(frozen=True)
class CrossLink:
    home: ParameterRef
    foreign: ParameterRef
    decision: object
    signature: str = ""


@dataclass(frozen=True)
class WeakLink:
    link: CrossLink
    home_weak: str
    foreign_weak: str
    decision: object


# -----------------------------------------------------
# Link discovery
# -----------------------------------------------------
def _foreign_order(model):
    """Foreign dimensions are visited by name, then hierarchy and level order."""
    return sorted(model.dimensions, key=lambda d: d.name)


def discover_links(model, cfg=None):
    """
    Every (home parameter, foreign parameter) pair with matching names.

    Returns:
        List of CrossLink ordered by home (dimension, hierarchy, level),
        then foreign (dimension name, hierarchy, level)
    """
    cfg = cfg or MatchConfig()
    signature = model.signature()
    links, seen = [], set()

    for home_dim in model.dimensions:
        for home_h in home_dim.hierarchies:
            for p in home_h.parameters:
                for foreign_dim in _foreign_order(model):
                    if foreign_dim.name == home_dim.name:
                        continue
                    for foreign_h in foreign_dim.hierarchies:
                        for q in foreign_h.parameters:
                            decision = attributes_match(p, home_dim.name, q, foreign_dim.name, cfg)
                            if not decision.matched:
                                continue
                            home = ParameterRef(home_dim.name, home_h.name, p)
                            foreign = ParameterRef(foreign_dim.name, foreign_h.name, q)
                            if (home, foreign) in seen:
                                continue
                            seen.add((home, foreign))
                            links.append(CrossLink(home, foreign, decision, signature))

    logger.info("discovered %d cross-dimension link(s)", len(links))
    return links


def discover_weak_links(model, links, cfg=None):
    """
    For each link, pair every home weak attribute of the home parameter
    with the best-matching weak attribute of the foreign parameter.
    Home weak attributes without a counterpart get no WeakLink.
    """
    cfg = cfg or MatchConfig()
    weak_links = []
    for link in links:
        home_h = model.dimension(link.home.dimension).hierarchy(link.home.hierarchy)
        foreign_h = model.dimension(link.foreign.dimension).hierarchy(link.foreign.hierarchy)
        candidates = foreign_h.weak_of(link.foreign.parameter)
        for w in home_h.weak_of(link.home.parameter):
            decision = best_match(w, link.home.dimension, candidates, link.foreign.dimension, cfg)
            if decision is not None:
                weak_links.append(WeakLink(link, w, decision.b, decision))
    return weak_links


def export_links(links, weak_links, path):
    """Write discovered links as JSON for inspection."""
    payload = {
        "links": [
            {
                "home": asdict(l.home),
                "foreign": asdict(l.foreign),
                "score": round(l.decision.score, 6),
            }
            for l in links
        ],
        "weak_links": [
            {
                "home": asdict(wl.link.home),
                "foreign": asdict(wl.link.foreign),
                "home_weak": wl.home_weak,
                "foreign_weak": wl.foreign_weak,
                "score": round(wl.decision.score, 6),
            }
            for wl in weak_links
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return path


# -----------------------------------------------------
# Fill passes
# -----------------------------------------------------
def _check_link(model, link):
    if link.signature and link.signature != model.signature():
        raise StaleLinkError(
            f"link {link.home.dimension}.{link.home.parameter} -> "
            f"{link.foreign.dimension}.{link.foreign.parameter} was discovered "
            f"against a different schema"
        )


def _home_attribute_for(home_dim, foreign_attr, foreign_dim, cfg, exclude):
    decision = best_match(foreign_attr, foreign_dim.name, home_dim.attributes,
                          home_dim.name, cfg, exclude=exclude)
    return decision.b if decision is not None else None


def impute_parameter_inter(model, link, cfg=None, policy=DEFAULT_POLICY):
    """
    Fill null values of the link's home parameter from the foreign dimension.

    Foreign parameters strictly below the matched one are scanned
    nearest-first; a foreign level is usable only if some home attribute
    matches it.

    Returns:
        List of FillRecord (source inter)
    """
    cfg = cfg or MatchConfig()
    _check_link(model, link)
    home_dim = model.dimension(link.home.dimension)
    foreign_dim = model.dimension(link.foreign.dimension)
    foreign_h = foreign_dim.hierarchy(link.foreign.hierarchy)
    home_level = home_dim.hierarchy(link.home.hierarchy).index(link.home.parameter)

    pairs = []
    for q in lower_parameters(foreign_h, link.foreign.parameter):
        a = _home_attribute_for(home_dim, q, foreign_dim, cfg, exclude=(link.home.parameter,))
        if a is not None:
            pairs.append((q, a))

    return _fill_from_foreign(
        home_dim, foreign_dim, link.home.parameter, link.foreign.parameter,
        pairs, link.home.hierarchy, home_level, policy,
    )


def impute_weak_inter(model, weak_link, cfg=None, policy=DEFAULT_POLICY):
    """
    Fill null values of a home weak attribute from the matched foreign
    weak attribute, matching on the foreign parameter first, then its
    lower parameters.
    """
    cfg = cfg or MatchConfig()
    link = weak_link.link
    _check_link(model, link)
    home_dim = model.dimension(link.home.dimension)
    foreign_dim = model.dimension(link.foreign.dimension)
    foreign_h = foreign_dim.hierarchy(link.foreign.hierarchy)
    home_level = home_dim.hierarchy(link.home.hierarchy).index(link.home.parameter)

    pairs = [(link.foreign.parameter, link.home.parameter)]
    for q in lower_parameters(foreign_h, link.foreign.parameter):
        a = _home_attribute_for(home_dim, q, foreign_dim, cfg, exclude=(weak_link.home_weak,))
        if a is not None:
            pairs.append((q, a))

    return _fill_from_foreign(
        home_dim, foreign_dim, weak_link.home_weak, weak_link.foreign_weak,
        pairs, link.home.hierarchy, home_level, policy,
    )


def _fill_from_foreign(home_dim, foreign_dim, target, foreign_value_attr,
                       pairs, hierarchy, level, policy):
    home, foreign = home_dim.table, foreign_dim.table
    if home is None or foreign is None or not pairs:
        return []
    pending = [addr.row_index for addr in missing_cells(home, target)]
    if not pending:
        return []

    home_cols = [(q, home.column_index(a)) for q, a in pairs]
    indexes = {}
    fills = []

    for r in pending:
        row = home.rows[r]
        for q, col in home_cols:
            own = row[col]
            if own is None:
                continue
            index = indexes.get(q)
            if index is None:
                index = indexes[q] = DonorIndex.build(foreign, q, foreign_value_attr, policy)
            hit = index.pick(policy.key(own))
            if hit is None:
                continue
            donor_row, value = hit
            home.set(r, target, value)
            fills.append(FillRecord(
                target=CellAddress(home_dim.name, r, target),
                value=value,
                donor_row=donor_row,
                donor_match_attribute=q,
                source=FillSource.INTER,
                hierarchy=hierarchy,
                donor_dimension=foreign_dim.name,
                level=level,
            ))
            break

    if fills:
        logger.debug("%s.%s: %d/%d filled from %s", home_dim.name, target,
                     len(fills), len(pending), foreign_dim.name)
    return fills


def run_inter(model, cfg=None, policy=DEFAULT_POLICY, validate=True):
    """
    Inter-dimension imputation over the whole warehouse.

    Home dimensions are processed one after another: a home pass writes
    the tables that later passes read as foreign.

    Returns:
        Fill log with source inter
    """
    cfg = cfg or MatchConfig()
    if validate:
        report = validate_schema(model)
        if not report.ok:
            raise SchemaValidationError(report)

    links = discover_links(model, cfg)
    if not links:
        return []
    weak_links = discover_weak_links(model, links, cfg)

    by_home = {}
    for link in links:
        by_home.setdefault(link.home, []).append(link)
    weak_by_home = {}
    for wl in weak_links:
        weak_by_home.setdefault((wl.link.home, wl.home_weak), []).append(wl)

    fills = []
    for d in model.dimensions:
        if d.table is None:
            continue
        for h in d.hierarchies:
            for level, p in enumerate(h.parameters):
                ref = ParameterRef(d.name, h.name, p)
                if level > 0:
                    for link in by_home.get(ref, ()):
                        fills.extend(impute_parameter_inter(model, link, cfg, policy))
                for w in h.weak_of(p):
                    for wl in weak_by_home.get((ref, w), ()):
                        fills.extend(impute_weak_inter(model, wl, cfg, policy))

    logger.info("inter pass filled %d cell(s)", len(fills))
    return fills
