"""Python access to the xsblab core: transforms, X^{s,b} norms, quadrature
estimates, split-step and Picard solvers, and the experiment harness."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_experiment as _run_experiment


def run(config_text, is_json=False, output_dir=""):
    """Run an experiment from TOML (or JSON) text; returns (summary dict, exit code)."""
    summary, code = _run_experiment(config_text, is_json, output_dir)
    return _json.loads(summary), code
