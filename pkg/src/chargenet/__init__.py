"""Event-driven simulation of charge-conserving spiking networks with exact
rational arithmetic, plus QANN conversion and cyclic-dynamics analysis."""

__version__ = "0.1.0"
