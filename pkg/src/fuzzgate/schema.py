"""API schema for the two registry endpoints.

The schema is first-class (not parsed from an OAS document): it names the
payload fields, their semantic types, and the endpoints' body shapes.  The
rule catalog builds its expressions from the same field specs, so every
field a rule can reference is a field the generator knows how to fill.
"""

from __future__ import annotations

from dataclasses import dataclass

VALIDATION_PATH = "/api/messages/validation"
AGGREGATION_PATH = "/api/messages/aggregation"

ENUM = "enum"
DIGITS = "digits"
DATE = "date"


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str  # ENUM, DIGITS or DATE
    values: tuple[str, ...] = ()  # enum pool
    length: int = 0  # digit-string length


MESSAGE_FIELD_SPECS: tuple[FieldSpec, ...] = (
    FieldSpec("meldingstype", ENUM, values=("K", "H", "D", "O")),
    FieldSpec("topografi", DIGITS, length=3),
    FieldSpec("metastase", ENUM, values=("0", "A", "B", "C", "D", "9", "5")),
    FieldSpec("ekstralokalisasjon", DIGITS, length=4),
    FieldSpec("diagnosedato", DATE),
    FieldSpec("cancerType", ENUM, values=("Breast", "Lung", "Prostate", "Colon")),
)

CANCER_TYPES = next(f.values for f in MESSAGE_FIELD_SPECS if f.name == "cancerType")


@dataclass(frozen=True)
class EndpointSchema:
    path: str
    body_kind: str  # "messages" (list of messages) or "case" (one cancer case)
    requires_auth: bool = True


@dataclass(frozen=True)
class ApiSchema:
    endpoints: tuple[EndpointSchema, ...]
    message_fields: tuple[FieldSpec, ...] = MESSAGE_FIELD_SPECS

    def field(self, name: str) -> FieldSpec:
        for spec in self.message_fields:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def field_names(self) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.message_fields)


def default_api_schema() -> ApiSchema:
    return ApiSchema(
        endpoints=(
            EndpointSchema(VALIDATION_PATH, body_kind="messages"),
            EndpointSchema(AGGREGATION_PATH, body_kind="case"),
        )
    )
