"""Critical percolation, radial SLE and backbone eigenproblem numerics."""
import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment as _run_experiment


def run(engine, config="", seed=None, workers=None):
    """Run an engine on key=value text; returns the result record as a dict."""
    return _json.loads(_run_experiment(engine, config, seed, workers))
