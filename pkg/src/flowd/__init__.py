"""flowd: a cloud coordinator that executes behavioral app models and
drives generic clients through a JSON iteration protocol."""

__version__ = "0.1.0"
