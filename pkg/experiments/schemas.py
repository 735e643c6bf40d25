import jsonschema

from .exceptions import ConfigError

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}
_NUMBER_LIST = {"type": "array", "items": _NUMBER, "minItems": 1}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_SIGNS = {"type": "array", "items": {"enum": [-1, 1]}}

_RATIONAL_COVERING = {
    "type": "object",
    "properties": {"type": {"enum": ["rational"]}, "tau": _POSITIVE, "c": _POSITIVE},
    "additionalProperties": False,
}

_POLYNOMIAL_COVERING = {
    "type": "object",
    "properties": {"type": {"enum": ["polynomial"]}, "T_coeffs": _NUMBER_LIST, "xi": _POSITIVE},
    "required": ["type", "T_coeffs"],
    "additionalProperties": False,
}

_JACOBI = {
    "type": "object",
    "properties": {"p": _NUMBER_LIST, "q": _NUMBER_LIST},
    "required": ["p", "q"],
    "additionalProperties": False,
}

_BRANCHING = {
    "type": "object",
    "properties": {
        "d": _COUNT,
        "points": {"type": "array", "items": _COMPLEX},
        "sigmas": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    },
    "required": ["d"],
    "additionalProperties": False,
}


def _parameters(properties):
    return {"type": "object", "properties": properties, "additionalProperties": False}


_PARAMETERS = {
    "validate_covering": _parameters({
        "branching": _BRANCHING,
        "compare_with": _BRANCHING,
        "expected_genus": {"type": "integer"},
    }),
    "renorm_iterate": _parameters({
        "tau": _POSITIVE,
        "c": _POSITIVE,
        "steps": _COUNT,
        "window": _COUNT,
        "K": _COUNT,
        "a0_p": _NUMBER_LIST,
        "target_tol": _POSITIVE,
        "ratio_tol": _POSITIVE,
        "ratio_floor": _POSITIVE,
    }),
    "renorm_poly": _parameters({
        "T_coeffs": _NUMBER_LIST,
        "xi": _POSITIVE,
        "jt": _JACOBI,
        "delta": _SIGNS,
        "window": _COUNT,
        "z_probes": {"type": "array", "items": _COMPLEX},
        "residual_tol": _POSITIVE,
        "perturbation": _POSITIVE,
        "scan": {"type": "boolean"},
        "scan_grid": _COUNT,
        "iterate_steps": {"type": "integer", "minimum": 0},
        "moments_K": _COUNT,
        "iterate_tol": _POSITIVE,
    }),
    "verify_identities": _parameters({
        "samples": _COUNT,
        "resolvent_samples": _COUNT,
        "tolerance_scale": _POSITIVE,
    }),
    "cmv": _parameters({
        "n": {"type": "integer", "minimum": 10},
        "a": {"type": "array", "items": _COMPLEX},
        "max_abs": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "real": {"type": "boolean"},
        "dt": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.01},
        "t_final": _POSITIVE,
        "projection": {"enum": ["skew", "upper_half"]},
        "record_every": _COUNT,
    }),
    "measure": _parameters({
        "covering": {"oneOf": [_RATIONAL_COVERING, _POLYNOMIAL_COVERING]},
        "n_samples": _COUNT,
        "n_steps": _COUNT,
        "K": _COUNT,
        "bins": _COUNT,
        "depth": _COUNT,
        "tv_tol": _POSITIVE,
        "oracle_depth": _COUNT,
        "oracle_tol": _POSITIVE,
        "ruelle": {"type": "boolean"},
        "conjecture_steps": {"type": "integer", "minimum": 0},
        "conjecture_tol": _POSITIVE,
        "jt": _JACOBI,
        "delta": _SIGNS,
    }),
    "lipschitz": _parameters({
        "T_coeffs": _NUMBER_LIST,
        "xi": _POSITIVE,
        "delta": _SIGNS,
        "pairs": _COUNT,
        "period": _COUNT,
        "blocks": _COUNT,
        "rho_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 2}},
        "darboux_n": _COUNT,
        "expect_contraction": {"type": "boolean"},
    }),
}


def get_config_schema(kind):
    """Schema of an experiment config file for `kind`; unknown keys are rejected at every level."""
    if kind not in _PARAMETERS:
        raise ConfigError(f"Unknown experiment kind '{kind}'.")
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "type": "object",
        "properties": {
            "kind": {"enum": [kind]},
            "parameters": _PARAMETERS[kind],
            "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
            "output_dir": {"type": "string", "minLength": 1},
        },
        "additionalProperties": False,
    }


def validate_config(config, kind):
    jsonschema.validate(config, schema=get_config_schema(kind))
