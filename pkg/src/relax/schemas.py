"""JSON schemas of the files written by the command-line driver."""

_number = {"type": "number"}
_interval = {
    "type": "object",
    "required": ["x0", "x1", "dL", "dR"],
    "properties": {"x0": _number, "x1": _number, "dL": _number, "dR": _number,
                   "fraction_left": _number},
}

REPORT_1D = {
    "type": "object",
    "required": ["experiment", "final_energy", "oscillation_intervals", "converged"],
    "properties": {
        "experiment": {"type": "string"},
        "final_energy": _number,
        "final_energy_cell": _number,
        "oracle_energy": _number,
        "oracle_x_star": _number,
        "oscillation_intervals": {"type": "array", "items": _interval},
        "converged": {"type": "boolean"},
        "outer_iterations": {"type": "integer", "minimum": 0},
        "final_constraint_error": _number,
        "seed": {"type": ["integer", "null"]},
        "config": {"type": "object"},
    },
}

REPORT_2D = {
    "type": "object",
    "required": ["experiment", "final_energy", "converged", "iterations"],
    "properties": {
        "experiment": {"type": "string"},
        "final_energy": _number,
        "converged": {"type": "boolean"},
        "iterations": {"type": "integer", "minimum": 0},
        "final_constraint_error": _number,
        "scheme": {"enum": ["forward", "symmetric"]},
        "config": {"type": "object"},
    },
}

MEASURE = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["x", "atoms"],
        "properties": {
            "x": _number,
            "atoms": {
                "type": "array", "minItems": 1, "maxItems": 2,
                "items": {"type": "object", "required": ["loc", "w"],
                          "properties": {"loc": _number,
                                         "w": {"type": "number", "minimum": 0, "maximum": 1}}},
            },
        },
    },
}

ORACLE = {
    "type": "object",
    "required": ["experiment", "x_star", "energy", "hamiltonian_drift", "level"],
    "properties": {"experiment": {"type": "string"}, "x_star": _number, "energy": _number,
                   "hamiltonian_drift": _number, "level": _number},
}

ENVELOPE = {
    "type": "object",
    "required": ["breakpoints", "values", "slopes", "left_slope", "right_slope"],
    "properties": {
        "breakpoints": {"type": "array", "items": _number},
        "values": {"type": "array", "items": _number},
        "slopes": {"type": "array", "items": _number},
        "left_slope": {"anyOf": [_number, {"enum": ["inf", "-inf"]}]},
        "right_slope": {"anyOf": [_number, {"enum": ["inf", "-inf"]}]},
    },
}

GRID_2D = {
    "type": "object",
    "required": ["x", "y", "u"],
    "properties": {"x": {"type": "array", "items": _number},
                   "y": {"type": "array", "items": _number},
                   "u": {"type": "array", "items": {"type": "array", "items": _number}}},
}

ERROR = {
    "type": "object",
    "required": ["error"],
    "properties": {"error": {"type": "object", "required": ["type", "message"],
                             "properties": {"type": {"type": "string"},
                                            "message": {"type": "string"},
                                            "field": {"type": ["string", "null"]}}}},
}
