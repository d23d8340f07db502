"""artifacts.py

Writes and Reads Artifact Directories: Manifest, CSV Tables, JSON Summaries and
Plotly Plot Scripts

"""
import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
ACCEPTANCE_NAME = "acceptance.json"
FLOAT_FORMAT = "%.12g"

PLOT_TEMPLATE = '''"""{name}.py

Plots the {name} Table

"""
from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

TABLE = Path(__file__).resolve().parent.parent / "{name}.csv"


def generate_figure(frame):
    fig = go.Figure()
    fig.add_trace(
        go.Scatter(
            x=frame["{x}"],
            y=frame["{y}"],
            error_y={error},
            mode="lines+markers",
            name="{y}",
        )
    )
    fig.update_layout(
        title="{name}",
        xaxis_title="{x}",
        yaxis_title="{y}",
        xaxis_type="{axis_type}",
        yaxis_type="{axis_type}",
    )
    return fig


if __name__ == "__main__":
    figure = generate_figure(pd.read_csv(TABLE))
    figure.write_html(str(TABLE.with_suffix(".html")))
'''


def _plain(value):
    """JSON-Safe Version of numpy Scalars, Arrays and Non-Finite Floats"""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path, data):
    with open(path, "w") as file:
        json.dump(_plain(data), file, indent=2, sort_keys=True)
        file.write("\n")


def read_json(path):
    with open(path, "r") as file:
        return json.load(file)


def write_table(path, rows):
    """Writes Rows as a CSV with a Fixed Float Format; Returns the File's SHA-256"""
    frame = pd.DataFrame([_plain(row) for row in rows])
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return file_hash(path)


def read_table(path):
    frame = pd.read_csv(path)
    return [
        {key: (None if isinstance(value, float) and math.isnan(value) else value) for key, value in row.items()}
        for row in frame.to_dict(orient="records")
    ]


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def emit_plot_script(directory, name, axes):
    """Writes plots/<name>.py Drawing One Table Column Against Another"""
    x, y, error, log = axes
    plots = Path(directory) / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    error_spec = f'dict(type="data", array=frame["{error}"])' if error else "None"
    path = plots / f"{name}.py"
    path.write_text(
        PLOT_TEMPLATE.format(name=name, x=x, y=y, error=error_spec, axis_type="log" if log else "linear")
    )
    return path


def load_artifacts(directory):
    """Manifest and Rows per Experiment of an Artifact Directory

    Raises
    ------
    FileNotFoundError
        If the Directory Has No Manifest
    """
    directory = Path(directory)
    manifest = read_json(directory / MANIFEST_NAME)
    tables = {}
    for experiment in manifest["experiments"]:
        path = directory / f"{experiment['name']}.csv"
        if path.exists():
            tables[experiment["name"]] = read_table(path)
    return manifest, tables
