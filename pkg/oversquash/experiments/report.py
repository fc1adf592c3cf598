""" Stable serialization of reports.

JSON reports have sorted keys; CSV tables keep the column order they are
given. numpy scalars and arrays are converted to plain Python values.
"""
import csv
import io
import json
import sys

import numpy as np

JSON = 'json'
CSV = 'csv'
FORMATS = (JSON, CSV)


def to_plain(obj):
    """ Recursively convert numpy values, tuples and report objects. """
    if hasattr(obj, 'as_dict'):
        return to_plain(obj.as_dict())
    if isinstance(obj, dict):
        return {str(key): to_plain(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def format_json(obj):
    return json.dumps(to_plain(obj), sort_keys=True, indent=2) + '\n'


def format_csv(rows, columns):
    """ CSV text of `rows` (dicts) with a header in `columns` order.

    Keys missing from a row give empty cells, keys not in `columns` are
    dropped.
    """
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns),
                            extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(to_plain(row))
    return buffer.getvalue()


def matrix_rows(matrix, value_name='value'):
    """ Rows (v, u, value) for every entry of a square matrix. """
    matrix = np.asarray(matrix)
    return [{'v': v, 'u': u, value_name: matrix[v, u]}
            for v in range(matrix.shape[0]) for u in range(matrix.shape[1])]


def format_report(payload, fmt=JSON, rows=None, columns=None):
    """ Render a report.

    Parameters
    ----------
    payload : object
        Report rendered as JSON.
    fmt : str
        'json' or 'csv'.
    rows : list[dict], optional
        Table rendered as CSV; required for 'csv'.
    columns : sequence[str], optional
        CSV column order.

    Returns
    -------
    str
    """
    if fmt == JSON:
        return format_json(payload)
    elif fmt == CSV:
        if rows is None or columns is None:
            raise ValueError('CSV output needs rows and columns')
        return format_csv(rows, columns)
    raise ValueError('Unknown report format: {}'.format(fmt))


def write_text(text, path=None):
    """ Write to `path`, or to stdout when `path` is None or '-'. """
    if path is None or path == '-':
        sys.stdout.write(text)
        return
    with open(path, 'w') as f:
        f.write(text)
