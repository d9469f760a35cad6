"""Synthetic rule catalog: 10 versions x 3 environments.

Rule bodies are generated from field/operator templates over the API
schema's message fields.  The catalog mirrors a realistic evolution:

* each version transition inserts new rules, occasionally deletes one,
  and modifies a few others (constraint added/removed, membership list
  extended/shrunk);
* per version, the ``test`` and ``prod`` environments carry the same rule
  ids and counts as ``dev`` but at least one rule body differs, the way a
  constraint may exist in one environment and not another.

Everything is deterministic in the seed.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path

from . import dsl
from .rules import AGGREGATION, SCOPE_ALL, VALIDATION, Rule, RuleSet
from .schema import CANCER_TYPES, DIGITS, ENUM, MESSAGE_FIELD_SPECS

VERSIONS = ("v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "v9", "v10")
ENVIRONMENTS = ("dev", "test", "prod")

#: (validation, aggregation) rule counts per version.
VERSION_COUNTS: dict[str, tuple[int, int]] = {
    "v1": (30, 32),
    "v2": (31, 33),
    "v3": (48, 35),
    "v4": (49, 35),
    "v5": (53, 37),
    "v6": (56, 37),
    "v7": (66, 38),
    "v8": (69, 43),
    "v9": (69, 43),
    "v10": (70, 43),
}

#: Version transitions that also delete one validation rule (replaced by
#: an extra insert, keeping the counts on track).
_DELETING_TRANSITIONS = {("v5", "v6"), ("v8", "v9")}

_ENUM_FIELDS = tuple(f for f in MESSAGE_FIELD_SPECS if f.kind == ENUM)
_DIGIT_FIELDS = tuple(f for f in MESSAGE_FIELD_SPECS if f.kind == DIGITS)


@dataclass(frozen=True)
class CatalogDelta:
    versionFrom: str
    versionTo: str
    environment: str
    changeType: str  # "insert" | "modify" | "delete"
    ruleId: str
    description: str = ""


@dataclass
class Catalog:
    seed: int
    rulesets: dict[tuple[str, str], RuleSet]  # (versionId, environment) -> RuleSet
    deltas: list[CatalogDelta]

    def ruleset(self, version: str, environment: str) -> RuleSet:
        return self.rulesets[(version, environment)]


# ---------------------------------------------------------------------------
# Random expression templates
# ---------------------------------------------------------------------------

def _digit_string(rng: random.Random, length: int) -> str:
    return "".join(rng.choice("0123456789") for _ in range(length))


def _enum_subset(rng: random.Random, values: tuple[str, ...], lo: int, hi: int) -> tuple[str, ...]:
    k = rng.randint(lo, min(hi, len(values)))
    return tuple(rng.sample(values, k))


def _rand_atom(rng: random.Random) -> dsl.BoolExpr:
    kind = rng.randrange(6)
    if kind == 0:
        field = rng.choice(_DIGIT_FIELDS)
        return dsl.StartsWith(dsl.FieldRef(field.name), _digit_string(rng, 2))
    if kind == 1:
        field = rng.choice(_DIGIT_FIELDS)
        width = min(2, field.length)
        items = tuple(sorted({_digit_string(rng, width) for _ in range(rng.randint(2, 4))}))
        return dsl.Membership(
            rng.choice(("in", "notIn")),
            dsl.Substring(dsl.FieldRef(field.name), 1, width),
            items,
        )
    if kind == 2:
        field = rng.choice(_ENUM_FIELDS)
        op = rng.choice(("=", "!="))
        return dsl.Compare(op, dsl.FieldRef(field.name), dsl.StrLit(rng.choice(field.values)))
    if kind == 3:
        field = rng.choice(_ENUM_FIELDS)
        items = _enum_subset(rng, field.values, 2, 4)
        return dsl.Membership(rng.choice(("in", "notIn")), dsl.FieldRef(field.name), items)
    if kind == 4:
        field = rng.choice(_DIGIT_FIELDS)
        return dsl.Compare("!=", dsl.FieldRef(field.name), dsl.StrLit(_digit_string(rng, field.length)))
    # year guard on the diagnosis date
    years = tuple(sorted({str(rng.randint(1800, 1950)) for _ in range(rng.randint(1, 2))}))
    return dsl.Membership("notIn", dsl.Substring(dsl.FieldRef("diagnosedato"), 1, 4), years)


def _rand_validation_expr(rng: random.Random) -> dsl.BoolExpr:
    n_antecedent = rng.randint(1, 2)
    atoms = tuple(_rand_atom(rng) for _ in range(n_antecedent))
    antecedent = atoms[0] if len(atoms) == 1 else dsl.And(atoms)
    return dsl.Implies(antecedent, _rand_atom(rng))


def _rand_aggregation_expr(rng: random.Random) -> dsl.BoolExpr:
    atoms = tuple(_rand_atom(rng) for _ in range(rng.randint(1, 2)))
    return atoms[0] if len(atoms) == 1 else dsl.And(atoms)


def _rand_scope(rng: random.Random) -> str:
    if rng.random() < 0.85:
        return rng.choice(CANCER_TYPES)
    return SCOPE_ALL


# ---------------------------------------------------------------------------
# Table-III-style body mutations
# ---------------------------------------------------------------------------

def _add_constraint(rng: random.Random, expr: dsl.BoolExpr) -> dsl.BoolExpr:
    atom = _rand_atom(rng)
    if isinstance(expr, dsl.Implies):
        ant = expr.antecedent
        parts = ant.parts + (atom,) if isinstance(ant, dsl.And) else (ant, atom)
        return dsl.Implies(dsl.And(parts), expr.consequent)
    if isinstance(expr, dsl.And):
        return dsl.And(expr.parts + (atom,))
    return dsl.And((expr, atom))


def _remove_constraint(rng: random.Random, expr: dsl.BoolExpr) -> dsl.BoolExpr:
    if isinstance(expr, dsl.Implies) and isinstance(expr.antecedent, dsl.And):
        parts = expr.antecedent.parts
        kept = parts[:-1]
        ant = kept[0] if len(kept) == 1 else dsl.And(kept)
        return dsl.Implies(ant, expr.consequent)
    if isinstance(expr, dsl.And) and len(expr.parts) >= 2:
        kept = expr.parts[:-1]
        return kept[0] if len(kept) == 1 else dsl.And(kept)
    return _add_constraint(rng, expr)


def _first_membership_path(expr) -> dsl.Membership | None:
    if isinstance(expr, dsl.Membership):
        return expr
    if isinstance(expr, dsl.And):
        for part in expr.parts:
            found = _first_membership_path(part)
            if found is not None:
                return found
    if isinstance(expr, dsl.Implies):
        return _first_membership_path(expr.antecedent) or _first_membership_path(expr.consequent)
    return None


def _replace_node(expr, old, new):
    if expr is old:
        return new
    if isinstance(expr, dsl.And):
        return dsl.And(tuple(_replace_node(p, old, new) for p in expr.parts))
    if isinstance(expr, dsl.Implies):
        return dsl.Implies(
            _replace_node(expr.antecedent, old, new),
            _replace_node(expr.consequent, old, new),
        )
    return expr


def _extend_list(rng: random.Random, expr: dsl.BoolExpr) -> dsl.BoolExpr:
    member = _first_membership_path(expr)
    if member is None:
        return _add_constraint(rng, expr)
    width = max(len(v) for v in member.items) if member.items else 2
    new_item = _digit_string(rng, width)
    while new_item in member.items:
        new_item = _digit_string(rng, width)
    return _replace_node(expr, member, dsl.Membership(member.op, member.left, member.items + (new_item,)))


def _shrink_list(rng: random.Random, expr: dsl.BoolExpr) -> dsl.BoolExpr:
    member = _first_membership_path(expr)
    if member is None or len(member.items) < 2:
        return _extend_list(rng, expr)
    return _replace_node(expr, member, dsl.Membership(member.op, member.left, member.items[:-1]))


_MUTATIONS = (_add_constraint, _remove_constraint, _extend_list, _shrink_list)


# ---------------------------------------------------------------------------
# Catalog construction
# ---------------------------------------------------------------------------

@dataclass
class _Draft:
    ruleId: str
    kind: str
    scope: str
    expr: dsl.BoolExpr


def _new_validation(rng: random.Random, rule_id: str) -> _Draft:
    return _Draft(rule_id, VALIDATION, _rand_scope(rng), _rand_validation_expr(rng))


def _new_aggregation(rng: random.Random, rule_id: str) -> _Draft:
    return _Draft(rule_id, AGGREGATION, SCOPE_ALL, _rand_aggregation_expr(rng))


def _build_ruleset(version: str, environment: str, drafts: list[_Draft]) -> RuleSet:
    validation = tuple(
        Rule(d.ruleId, d.kind, d.scope, d.expr) for d in drafts if d.kind == VALIDATION
    )
    aggregation = tuple(
        Rule(d.ruleId, d.kind, d.scope, d.expr) for d in drafts if d.kind == AGGREGATION
    )
    return RuleSet(version, environment, validation, aggregation)


def generate_catalog(seed: int) -> Catalog:
    """Build the full catalog for every (version, environment) pair.

    Counts follow :data:`VERSION_COUNTS` exactly in all three environments.
    """
    rng = random.Random(seed)
    deltas: list[CatalogDelta] = []
    rulesets: dict[tuple[str, str], RuleSet] = {}

    next_val_id = 1
    next_agg_id = 1

    def val_id() -> str:
        nonlocal next_val_id
        rid = f"R{next_val_id:02d}"
        next_val_id += 1
        return rid

    def agg_id() -> str:
        nonlocal next_agg_id
        rid = f"A{next_agg_id:02d}"
        next_agg_id += 1
        return rid

    n_val, n_agg = VERSION_COUNTS["v1"]
    drafts: list[_Draft] = [_new_validation(rng, val_id()) for _ in range(n_val)]
    drafts += [_new_aggregation(rng, agg_id()) for _ in range(n_agg)]

    def snapshot(items: list[_Draft]) -> list[_Draft]:
        # drafts are mutated across transitions; versions need frozen copies
        return [_Draft(d.ruleId, d.kind, d.scope, d.expr) for d in items]

    per_version_base: dict[str, list[_Draft]] = {"v1": snapshot(drafts)}

    for prev, cur in zip(VERSIONS, VERSIONS[1:]):
        pv, pa = VERSION_COUNTS[prev]
        cv, ca = VERSION_COUNTS[cur]
        transition: list[tuple[str, str, str]] = []  # (change, ruleId, description)

        insert_val = cv - pv
        if (prev, cur) in _DELETING_TRANSITIONS:
            validation_drafts = [d for d in drafts if d.kind == VALIDATION]
            victim = validation_drafts[rng.randrange(len(validation_drafts))]
            drafts.remove(victim)
            transition.append(("delete", victim.ruleId, "rule retired"))
            insert_val += 1

        for _ in range(insert_val):
            draft = _new_validation(rng, val_id())
            drafts.append(draft)
            transition.append(("insert", draft.ruleId, "new validation rule"))
        for _ in range(ca - pa):
            draft = _new_aggregation(rng, agg_id())
            drafts.append(draft)
            transition.append(("insert", draft.ruleId, "new aggregation rule"))

        for _ in range(rng.randint(1, 3)):
            target = drafts[rng.randrange(len(drafts))]
            mutation = rng.choice(_MUTATIONS)
            target.expr = mutation(rng, target.expr)
            transition.append(("modify", target.ruleId, mutation.__name__.lstrip("_")))

        per_version_base[cur] = snapshot(drafts)
        for env in ENVIRONMENTS:
            for change, rule_id, description in transition:
                deltas.append(CatalogDelta(prev, cur, env, change, rule_id, description))

    # Per-version environment variants.  test gets an extra constraint on one
    # validation rule; prod gets a membership-list change on its neighbour,
    # so test and prod always differ from dev and from each other.
    for version in VERSIONS:
        base = per_version_base[version]
        validation_ids = [i for i, d in enumerate(base) if d.kind == VALIDATION]
        t_idx = validation_ids[rng.randrange(len(validation_ids))]
        p_idx = validation_ids[(validation_ids.index(t_idx) + 1) % len(validation_ids)]

        test_drafts = [_Draft(d.ruleId, d.kind, d.scope, d.expr) for d in base]
        test_drafts[t_idx].expr = _add_constraint(rng, test_drafts[t_idx].expr)
        deltas.append(
            CatalogDelta(version, version, "test", "modify", test_drafts[t_idx].ruleId,
                         "constraint present only in test")
        )

        prod_drafts = [_Draft(d.ruleId, d.kind, d.scope, d.expr) for d in base]
        prod_drafts[p_idx].expr = _extend_list(rng, prod_drafts[p_idx].expr)
        deltas.append(
            CatalogDelta(version, version, "prod", "modify", prod_drafts[p_idx].ruleId,
                         "membership list extended only in prod")
        )

        rulesets[(version, "dev")] = _build_ruleset(version, "dev", base)
        rulesets[(version, "test")] = _build_ruleset(version, "test", test_drafts)
        rulesets[(version, "prod")] = _build_ruleset(version, "prod", prod_drafts)

    return Catalog(seed=seed, rulesets=rulesets, deltas=deltas)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def ruleset_lines(ruleset: RuleSet) -> list[str]:
    lines = []
    for rule in ruleset.validationRules + ruleset.aggregationRules:
        lines.append(f"{rule.ruleId}|{rule.kind}|{rule.scope}|{rule.text()}")
    return lines


def save_catalog(catalog: Catalog, directory: str | Path) -> None:
    """One ``<version>_<env>.rules`` file per cell plus ``deltas.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for (version, env), ruleset in sorted(catalog.rulesets.items()):
        path = directory / f"{version}_{env}.rules"
        path.write_text("\n".join(ruleset_lines(ruleset)) + "\n", encoding="utf-8")
    with open(directory / "deltas.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["version_from", "version_to", "env", "change_type", "rule_id"])
        for delta in catalog.deltas:
            writer.writerow(
                [delta.versionFrom, delta.versionTo, delta.environment,
                 delta.changeType, delta.ruleId]
            )


def load_ruleset(path: str | Path, version: str, environment: str) -> RuleSet:
    from .rules import parse_rule

    validation, aggregation = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rule_id, kind, scope, text = line.split("|", 3)
        rule = parse_rule(text, rule_id, kind, scope)
        (validation if kind == VALIDATION else aggregation).append(rule)
    return RuleSet(version, environment, tuple(validation), tuple(aggregation))


def load_catalog(directory: str | Path, seed: int = -1) -> Catalog:
    directory = Path(directory)
    rulesets = {}
    for version in VERSIONS:
        for env in ENVIRONMENTS:
            path = directory / f"{version}_{env}.rules"
            rulesets[(version, env)] = load_ruleset(path, version, env)
    deltas = []
    with open(directory / "deltas.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            deltas.append(
                CatalogDelta(row["version_from"], row["version_to"], row["env"],
                             row["change_type"], row["rule_id"])
            )
    return Catalog(seed=seed, rulesets=rulesets, deltas=deltas)
