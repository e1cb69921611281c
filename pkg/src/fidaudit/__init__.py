"""fidaudit: executable checks for fiduciary duties of automated systems.

The package turns a declared scenario (context, principals, world models,
and per-duty configuration) into a six-step audit report: context,
identification, assessment, aggregation, loyalty, care. Each step is
backed by an exactly computable formal check; see the module docstrings
for the underlying machinery.
"""

__version__ = "0.1.0"
