"""Configuration files, solver-deck export and the command-line front end."""
from .config import RunConfig, load_config, parse_config
from .deck import DeckSpec, export_cload, export_dload_table

__all__ = ["DeckSpec", "RunConfig", "export_cload", "export_dload_table",
           "load_config", "parse_config"]
