"""Monte Carlo estimation of aggregate IMT interference into a spaceborne
SAR receiver sharing 10.0-10.4 GHz.

``engine.run_scenario`` is the main programmatic entry point, ``cli.main``
the command-line front end.  Re-exports below are lazy so that importing a
single topic module does not drag in the whole dependency chain.
"""

__version__ = "0.1.0"

_LAZY = {
    "ScenarioConfig": "imtsar.engine",
    "run_scenario": "imtsar.engine",
    "run_case_suite": "imtsar.engine",
}

__all__ = [*_LAZY, "__version__"]


def __getattr__(name):
    if name in _LAZY:
        import importlib

        return getattr(importlib.import_module(_LAZY[name]), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
