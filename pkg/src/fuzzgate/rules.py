"""Rule evaluation engine for the simulated registry.

Two rule kinds exist:

* *validation* rules run against a single cancer message.  They may be
  blocked (``NotApplied``) by a scope mismatch, a missing required field,
  or a malformed diagnosis date.
* *aggregation* rules run against a whole cancer case and are always
  fully evaluated (``Applied``): a case satisfies a rule when every one
  of its messages does, vacuously so for an empty case.

Evaluation is total: it never raises, whatever the payload looks like.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import dsl
from .dates import is_format_valid

VALIDATION = "validation"
AGGREGATION = "aggregation"
SCOPE_ALL = "All"

#: Message-level fields a rule may reference.
MESSAGE_FIELDS = (
    "meldingstype",
    "topografi",
    "metastase",
    "ekstralokalisasjon",
    "diagnosedato",
    "cancerType",
)


@dataclass(frozen=True)
class CancerMessage:
    """One untrusted message payload.  Everything is optional or malformed-capable.

    Field access is case-insensitive: rule text traditionally capitalizes
    field names while payload keys are lowercase.
    """

    fields: Mapping[str, Any]

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CancerMessage":
        return cls(dict(raw))

    def get(self, name: str):
        if name in self.fields:
            return self.fields[name]
        lowered = name.lower()
        for key, value in self.fields.items():
            if key.lower() == lowered:
                return value
        return None


@dataclass(frozen=True)
class CancerCase:
    caseId: str
    diagnosedato: Any
    messages: tuple[CancerMessage, ...]

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CancerCase":
        msgs = tuple(
            CancerMessage.from_dict(m) for m in raw.get("messages", []) if isinstance(m, Mapping)
        )
        return cls(
            caseId=str(raw.get("caseId", "")),
            diagnosedato=raw.get("diagnosedato"),
            messages=msgs,
        )


@dataclass(frozen=True)
class RuleOutcome:
    """Outcome of one rule hit.

    ``applied`` tells whether the rule was fully evaluated; ``satisfied``
    is meaningful only when applied, ``blockingField`` only when not.
    """

    applied: bool
    satisfied: bool | None = None
    blockingField: str | None = None

    @classmethod
    def ok(cls, satisfied: bool) -> "RuleOutcome":
        return cls(applied=True, satisfied=satisfied)

    @classmethod
    def blocked(cls, blocking_field: str) -> "RuleOutcome":
        return cls(applied=False, blockingField=blocking_field)


@dataclass
class Rule:
    ruleId: str
    kind: str  # VALIDATION or AGGREGATION
    scope: str  # a cancerType or SCOPE_ALL
    expr: dsl.BoolExpr
    requiredFields: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        self.requiredFields = dsl.referenced_fields(self.expr)
        self._compiled = dsl.compile_bool(self.expr)

    def text(self) -> str:
        return dsl.print_expr(self.expr)


def parse_rule(text: str, rule_id: str, kind: str, scope: str) -> Rule:
    """Parse DSL *text* into a :class:`Rule`.

    Raises :class:`fuzzgate.dsl.DslSyntaxError` (with a 1-based character
    offset) or :class:`fuzzgate.dsl.UnknownOperatorError` on bad input.
    """
    if kind not in (VALIDATION, AGGREGATION):
        raise ValueError(f"unknown rule kind {kind!r}")
    return Rule(ruleId=rule_id, kind=kind, scope=scope, expr=dsl.parse_expr(text))


def _as_text(value) -> str:
    if isinstance(value, str):
        return value
    return str(value)


def _message_env(msg: CancerMessage) -> dict[str, str]:
    return {
        name.lower(): _as_text(value)
        for name, value in msg.fields.items()
        if value is not None
    }


def evaluate_validation_rule(rule: Rule, msg: CancerMessage) -> RuleOutcome:
    """Evaluate a validation rule against one message.

    Blocking checks run in a fixed order: scope mismatch first, then the
    diagnosis date (a message without a well-formed date cannot be
    validated by any rule, referenced or not), then missing required
    fields in expression order.
    """
    if rule.scope != SCOPE_ALL:
        subject_type = msg.get("cancerType")
        if not isinstance(subject_type, str) or subject_type != rule.scope:
            return RuleOutcome.blocked("cancerType")
    if not is_format_valid(msg.get("diagnosedato")):
        return RuleOutcome.blocked("diagnosedato")
    for name in rule.requiredFields:
        if msg.get(name) is None:
            return RuleOutcome.blocked(name)
    return RuleOutcome.ok(rule._compiled(_message_env(msg)))


def evaluate_aggregation_rule(rule: Rule, case: CancerCase) -> RuleOutcome:
    """Evaluate an aggregation rule against a case; always ``Applied``.

    The rule is satisfied when every message satisfies it (missing fields
    read as ""); an empty case is vacuously satisfied.  Case-level fields
    are visible to the rule and shadowed by message fields of the same name.
    """
    case_env = {"caseid": _as_text(case.caseId)}
    if case.diagnosedato is not None:
        case_env["diagnosedato"] = _as_text(case.diagnosedato)
    if not case.messages:
        return RuleOutcome.ok(rule._compiled(case_env))
    satisfied = True
    for msg in case.messages:
        env = dict(case_env)
        env.update(_message_env(msg))
        if not rule._compiled(env):
            satisfied = False
            break
    return RuleOutcome.ok(satisfied)


def evaluate_rule(rule: Rule, subject) -> RuleOutcome:
    """Dispatch on subject type; messages take validation rules, cases aggregation."""
    if isinstance(subject, CancerMessage):
        return evaluate_validation_rule(rule, subject)
    if isinstance(subject, CancerCase):
        return evaluate_aggregation_rule(rule, subject)
    raise TypeError(f"cannot evaluate rule against {type(subject).__name__}")


@dataclass(frozen=True)
class RuleSet:
    versionId: str
    environment: str
    validationRules: tuple[Rule, ...]
    aggregationRules: tuple[Rule, ...]

    def counts(self) -> tuple[int, int]:
        return (len(self.validationRules), len(self.aggregationRules))


@dataclass(frozen=True)
class AggregatedCase:
    caseId: str
    messageCount: int
    ruleSatisfied: Mapping[str, bool]


class AggregationFault(Exception):
    """Server-fault condition raised while consolidating a case.

    The registry service turns this into a 500 response.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def validate_message(ruleset: RuleSet, msg: CancerMessage) -> list[tuple[str, RuleOutcome]]:
    """One outcome per validation rule, in catalog order; each is one rule hit."""
    return [(rule.ruleId, evaluate_validation_rule(rule, msg)) for rule in ruleset.validationRules]


def aggregate_case(
    ruleset: RuleSet, case: CancerCase
) -> tuple[AggregatedCase, list[tuple[str, RuleOutcome]]]:
    """Evaluate every aggregation rule against *case*.

    Raises :class:`AggregationFault` when the case date is format-valid
    but not a real calendar day, or when a message carries a type-confused
    (non-string) field value.
    """
    from .dates import is_calendar_valid

    if is_format_valid(case.diagnosedato) and not is_calendar_valid(case.diagnosedato):
        raise AggregationFault("calendar-invalid case diagnosis date")
    for msg in case.messages:
        for name, value in msg.fields.items():
            if value is not None and not isinstance(value, str):
                raise AggregationFault(f"type-confused field {name!r}")

    outcomes = [
        (rule.ruleId, evaluate_aggregation_rule(rule, case)) for rule in ruleset.aggregationRules
    ]
    aggregated = AggregatedCase(
        caseId=case.caseId,
        messageCount=len(case.messages),
        ruleSatisfied={rule_id: bool(outcome.satisfied) for rule_id, outcome in outcomes},
    )
    return aggregated, outcomes


def outcome_message(rule_id: str, outcome: RuleOutcome) -> dict[str, Any]:
    """Render one rule hit the way the registry reports it."""
    if outcome.applied:
        return {
            "ruleId": rule_id,
            "outcome": "APPLIED",
            "satisfied": outcome.satisfied,
            "text": f"Rule {rule_id} {'satisfied' if outcome.satisfied else 'violated'}",
        }
    if outcome.blockingField == "diagnosedato":
        text = "This rule is not used because of diagnose date"
    else:
        text = f"This rule is not used because of {outcome.blockingField}"
    return {
        "ruleId": rule_id,
        "outcome": "NOT_APPLIED",
        "blockingField": outcome.blockingField,
        "text": text,
    }
