"""rydfibre: van der Waals interactions of Rydberg Rb pairs near an optical nanofibre."""

__version__ = "0.1.0"
