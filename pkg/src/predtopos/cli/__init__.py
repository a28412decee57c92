"""Command-line front end: description files in, reports out."""

from .fileformat import Workspace, parse_string, parse_workspace
from .report import Report

__all__ = ["Report", "Workspace", "parse_string", "parse_workspace"]
