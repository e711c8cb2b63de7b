"""JSON schemas for CLI inputs, and validation with path-named errors."""

from __future__ import annotations

from typing import Any

import jsonschema

EXPONENT = {
    "oneOf": [
        {"type": "number", "exclusiveMinimum": 0},
        {"type": "string", "enum": ["inf"]},
    ]
}

MEASURE = {
    "type": "object",
    "required": ["weights"],
    "properties": {
        "weights": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
    },
    "additionalProperties": False,
}

FAMILY = {
    "type": "object",
    "required": ["values"],
    "properties": {
        "values": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        },
        "measure": MEASURE,
    },
    "additionalProperties": False,
}

OPERATOR = {
    "type": "object",
    "required": ["arity", "input_dims", "coeffs", "output_measure"],
    "properties": {
        "arity": {"type": "integer", "minimum": 1},
        "input_dims": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "coeffs": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "output_measure": MEASURE,
        "input_measures": {"type": "array", "items": MEASURE},
    },
    "additionalProperties": False,
}

# a witness bundle is an operator plus provenance of how it was generated
WITNESS_BUNDLE = {
    "type": "object",
    "required": ["operator"],
    "properties": {
        "operator": OPERATOR,
        "metadata": {"type": "object"},
        "schema_version": {"type": "integer"},
    },
}

ESTIMATE_CONFIG = {
    "type": "object",
    "required": ["q", "p", "r", "n"],
    "properties": {
        "q": {"type": "array", "minItems": 1, "items": EXPONENT},
        "p": EXPONENT,
        "r": EXPONENT,
        "n": {"type": "integer", "minimum": 1},
        "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "budget": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "restarts": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "measure": MEASURE,
    "family": FAMILY,
    "operator": OPERATOR,
    "witness_bundle": WITNESS_BUNDLE,
    "estimate_config": ESTIMATE_CONFIG,
}


class SchemaError(ValueError):
    """Input document does not match its schema; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(error: jsonschema.ValidationError) -> str:
    out = "$"
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def validate(document: Any, schema_name: str) -> None:
    """Raise SchemaError for the first (deepest-path) violation, else return."""
    validator = jsonschema.Draft202012Validator(SCHEMAS[schema_name])
    errors = sorted(validator.iter_errors(document), key=lambda e: (-len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise SchemaError(_path(err), err.message)
