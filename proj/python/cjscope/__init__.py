"""Static and network analysis of in-browser cryptojacking."""

import json as _json

from . import _cjscope
from ._cjscope import (
    MalformedFrame,
    ParseError,
    credit_per_share,
    cyclomatic,
    feature_names,
    features,
    pearson,
    select_features,
    session_profit,
    time_to_one_xmr,
)

__all__ = [
    "MalformedFrame", "ParseError", "blacklist", "classify_frame", "cluster", "credit_per_share",
    "cyclomatic", "detect", "econ_report", "feature_names", "features", "pearson", "run_cli",
    "scan_html", "select_features", "session_profit", "simulate", "synthetic_distribution",
    "time_to_one_xmr",
]


def classify_frame(text):
    """The frame as a dict, or None when the text is not a protocol message."""
    frame = _cjscope.classify_frame(text)
    return None if frame is None else _json.loads(frame)


def cluster(csv=None, restarts=20, seed=1):
    return _json.loads(_cjscope.cluster(csv, restarts, seed))


def detect(jsonl):
    return _json.loads(_cjscope.detect(jsonl))


def blacklist(url, patterns):
    return _json.loads(_cjscope.blacklist(url, list(patterns)))


def simulate(scenario="relay"):
    """Runs a built-in scenario by name, or one given as a dict."""
    if isinstance(scenario, dict):
        scenario = _json.dumps(scenario)
    return _json.loads(_cjscope.simulate(scenario))


def econ_report(device=None, alpha=None):
    return _json.loads(_cjscope.econ_report(device, alpha))


def scan_html(html, domain=""):
    return _json.loads(_cjscope.scan_html(html, domain))


def synthetic_distribution(seed=1):
    return _json.loads(_cjscope.synthetic_distribution(seed))


def run_cli(args, stdin=""):
    """(exit code, stdout, stderr) of the command-line tool."""
    return _cjscope.run_cli(list(args), stdin)
