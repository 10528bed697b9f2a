"""Entry point for running algemech as a module."""

from algemech.cli.main import app

if __name__ == "__main__":
    app()
