"""Smart-contract-mediated distributed key generation: library and simulator."""

__version__ = "0.1.0"
