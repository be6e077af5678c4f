"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration file or config object failed validation."""


class UnsupportedConfigError(ValueError):
    """A structurally valid configuration that this build does not support
    (e.g. NOMA or rate-region sweeps with K != 2)."""
