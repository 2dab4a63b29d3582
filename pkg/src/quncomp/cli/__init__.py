"""Command line front end: program parser and the ``quncomp`` tool."""

from .parser import Directive, Program, execute, parse

__all__ = ["Directive", "Program", "execute", "parse"]
