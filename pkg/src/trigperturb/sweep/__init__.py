"""Sweep driver: task runner, rate fits and the command line."""
