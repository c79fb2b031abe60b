"""Two-layer supersonic nozzle flow with a contact discontinuity under the rotating Euler system."""

__version__ = "0.1.0"
