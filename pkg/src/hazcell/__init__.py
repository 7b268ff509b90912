"""
hazcell - exposure and direct damage of cellular network assets to coastal
flooding, riverine flooding and tropical cyclones under climate scenarios.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
