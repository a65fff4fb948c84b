"""Shared exception hierarchy.

Everything raised for bad *data* (malformed files, inconsistent inputs)
derives from :class:`EngineError`, so the CLI can map it to a data-error
exit code without enumerating modules.
"""


class EngineError(Exception):
    """Base class for all data and processing errors raised by wtparse."""
