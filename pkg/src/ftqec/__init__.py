"""Monte Carlo study of fault-tolerant ancilla preparation and error recovery
for the seven-qubit CSS code."""

__version__ = "0.1.0"
