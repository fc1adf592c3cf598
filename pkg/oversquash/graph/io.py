""" Reading and writing graphs.

Two formats are supported:

* Edge list text: optional header `# nodes <n>`, then one `<u> <v>`
  pair per line. Other lines starting with `#` and blank lines are
  skipped. Without a header n is the largest node id plus one.
* JSON: `{"num_nodes": n, "edges": [[u, v], ...]}`.
"""
import io
import json
import re

from oversquash.exceptions import GraphFormatError
from oversquash.graph.core import build_graph

NODES_HEADER = re.compile(r'^#\s*nodes\s+(\d+)\s*$')


def parse_edge_list(text):
    """ Parse edge list text into a `Graph`.

    Parameters
    ----------
    text : str
        File contents.

    Returns
    -------
    Graph

    Raises
    ------
    GraphFormatError
        On lines that are not two integers.
    """
    num_nodes = None
    edges = list()
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith('#'):
            match = NODES_HEADER.match(line)
            if match is not None:
                num_nodes = int(match.group(1))
            continue

        fields = line.split()
        try:
            if len(fields) != 2:
                raise ValueError
            edges.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise GraphFormatError('Line {}: expected "<u> <v>", got "{}"'.format(
                line_no, line))

    if num_nodes is None:
        num_nodes = max(max(edge) for edge in edges) + 1 if edges else 0
    return build_graph(num_nodes, edges)


def format_edge_list(graph):
    lines = ['# nodes {}'.format(graph.num_nodes)]
    lines.extend('{} {}'.format(v, u) for v, u in graph.edges)
    return '\n'.join(lines) + '\n'


def parse_json(text):
    try:
        data = json.loads(text)
        num_nodes = data['num_nodes']
        edges = [tuple(edge) for edge in data['edges']]
    except (ValueError, KeyError, TypeError) as e:
        raise GraphFormatError('Invalid JSON graph: {}'.format(e))
    return build_graph(num_nodes, edges)


def format_json(graph):
    data = dict(num_nodes=graph.num_nodes,
                edges=[list(edge) for edge in graph.edges])
    return json.dumps(data, sort_keys=True)


def _is_json_path(path):
    return str(path).lower().endswith('.json')


def load_graph(file, fmt=None):
    """ Load graph from path or file handle.

    Parameters
    ----------
    file : str, file-like
        Path to, or handle to, a graph file.
    fmt : str, optional
        'json' or 'edgelist'. Inferred from the file suffix if None.

    Returns
    -------
    Graph
    """
    if isinstance(file, io.IOBase) or hasattr(file, 'read'):
        text = file.read()
        name = getattr(file, 'name', '')
    else:
        with open(file) as f:
            text = f.read()
        name = file

    if fmt is None:
        fmt = 'json' if _is_json_path(name) else 'edgelist'
    if fmt == 'json':
        return parse_json(text)
    return parse_edge_list(text)


def save_graph(graph, path, fmt=None):
    """ Write graph to `path` as edge list or JSON (by suffix if `fmt` is
    None).
    """
    if fmt is None:
        fmt = 'json' if _is_json_path(path) else 'edgelist'
    text = format_json(graph) if fmt == 'json' else format_edge_list(graph)
    with open(path, 'w') as f:
        f.write(text)
