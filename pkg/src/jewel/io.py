"""JSON encoding of matrices, POVMs, tuples, witnesses and verdicts.

Complex scalars are two-element arrays ``[re, im]``; a matrix is an array of
rows.  :func:`dumps` writes a canonical form (sorted keys, floats with 17
significant digits) so that ``loads(dumps(x))`` restores every float bit for
bit and re-serialising is byte-stable.
"""

import json
import math

import numpy as np

from .errors import ValidationError


class DecodeError(ValidationError):
    """Malformed JSON document; ``path`` names the offending location."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _format_float(x):
    if math.isnan(x) or math.isinf(x):
        # JSON has no literal; these only appear in verdict payloads.
        return json.dumps(str(x))
    text = "%.17g" % x
    if not any(c in text for c in ".eEn"):
        text += ".0"
    return text


def _encode(obj, out):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    out = []
    _encode(obj, out)
    return "".join(out)


def loads(text):
    return json.loads(text)


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[encode_complex(z) for z in row] for row in M]


def decode_complex(value, path="$"):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise DecodeError(path, "complex scalar must be [re, im]")
    return complex(value[0], value[1])


def decode_matrix(value, path="$"):
    if not isinstance(value, list) or not value:
        raise DecodeError(path, "matrix must be a non-empty array of rows")
    rows = []
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise DecodeError(f"{path}[{i}]", "row must be an array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DecodeError(f"{path}[{i}]", f"row length {len(row)} != {width}")
        rows.append([decode_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    return np.array(rows, dtype=complex)


def require(data, key, path):
    if not isinstance(data, dict):
        raise DecodeError(path, "expected an object")
    if key not in data:
        raise DecodeError(f"{path}.{key}", "missing field")
    return data[key]


def require_int(data, key, path, minimum=1):
    value = require(data, key, path)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise DecodeError(f"{path}.{key}", f"expected an integer >= {minimum}")
    return value


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DecodeError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def write_json(path, obj):
    text = dumps(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")
