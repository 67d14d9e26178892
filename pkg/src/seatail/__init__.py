"""seatail: numerical laboratory for spherically symmetric Dirac-sea regularizations."""

__version__ = "0.1.0"
