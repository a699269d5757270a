"""Private read-update-write simulator for sparse federated learning."""

__version__ = "1.0.0"
