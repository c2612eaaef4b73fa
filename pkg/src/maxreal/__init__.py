"""Synthesis of finite-state controllers that satisfy a hard LTL
specification and as much as possible of a set of soft safety
specifications."""

__version__ = "0.1.0"
