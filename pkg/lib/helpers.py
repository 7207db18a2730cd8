import csv
import json
import math
import sys
import logging
import numpy as np
from lib.errors import ParseError, ValidationError

logger = logging.getLogger('exsel.helpers')


def parse_int_list(content):
    """Parse a comma separated flag value such as "3,3" into a list of ints."""
    try:
        return [int(part) for part in content.replace(' ', '').split(',') if part != '']
    except ValueError:
        raise ValidationError("Expected a comma separated list of integers, got '" + str(content) + "'")


def relabel_by_first_appearance(labels):
    """Rename labels to 0..n-1 in the order they first occur."""
    mapping = {}
    out = np.empty(len(labels), dtype=int)
    for position, label in enumerate(labels):
        if label not in mapping:
            mapping[label] = len(mapping)
        out[position] = mapping[label]
    return out


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no infinities; the sentinel is serialized as null
        return value if math.isfinite(value) else None
    if hasattr(value, 'value'):
        return value.value
    return value


def dump_json(document):
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2) + "\n"


def write_json(document, path=None):
    text = dump_json(document)
    if path is None or path == '-':
        sys.stdout.write(text)
    else:
        with open(path, mode='wt') as file:
            file.write(text)
    logger.debug("Wrote JSON document to " + str(path or 'stdout'))


def read_json(path):
    try:
        with open(path, mode='rt') as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg)


def write_labels(labels, path=None):
    lines = "".join(str(int(label)) + "\n" for label in labels)
    if path is None or path == '-':
        sys.stdout.write(lines)
    else:
        with open(path, mode='wt') as file:
            file.write(lines)


def read_labels(path):
    labels = []
    with open(path, mode='rt', newline='') as file:
        reader = csv.reader(file)
        for row in reader:
            if not row:
                continue
            if len(row) != 1:
                raise ParseError(reader.line_num, "expected one label per line")
            try:
                labels.append(int(row[0]))
            except ValueError:
                raise ParseError(reader.line_num, "label '" + row[0] + "' is not an integer")
    return np.asarray(labels, dtype=int)
