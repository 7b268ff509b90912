"""
Main entry point for the hazcell command line.
"""

from .cli import app


def main() -> None:
    """Run the hazcell CLI."""
    app()


if __name__ == "__main__":
    main()
