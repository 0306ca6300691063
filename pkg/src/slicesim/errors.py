"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """An input parameter or scenario file violates a documented constraint."""


class SliceTooNarrowError(ConfigurationError):
    """A bandwidth slice is too small to hold a single resource block."""


class EndOfSimulation(Exception):
    """Raised when a time lookup falls beyond the scheduled horizon."""
