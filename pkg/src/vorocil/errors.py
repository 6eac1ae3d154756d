"""Exception hierarchy shared across the engine, service, and CLI."""

from __future__ import annotations


class VorocilError(Exception):
    """Base class for all engine errors."""

    category = "runtime"


class ConfigError(VorocilError):
    """Invalid configuration: bad mode strings, incompatible flags, bad parameters."""

    category = "config"


class DataError(VorocilError):
    """Invalid data: dimension mismatches, malformed files, label violations."""

    category = "data"
