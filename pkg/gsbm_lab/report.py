"""JSON and CSV output for command reports."""
import csv
import datetime
import json
import math

import numpy as np

TIMESTAMP_KEY = 'generated_at'


def to_jsonable(value):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf" and "nan"."""
    if hasattr(value, 'as_dict'):
        return to_jsonable(value.as_dict())
    if hasattr(value, '_asdict'):
        return to_jsonable(value._asdict())
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
        if math.isfinite(value):
            return value
        return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')


def dumps(data):
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + '\n'


def strip_timestamp(data):
    return {key: value for key, value in data.items() if key != TIMESTAMP_KEY}


def write_csv(fp, rows, fieldnames=None):
    rows = [to_jsonable(row) for row in rows]
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    writer = csv.DictWriter(fp, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)
