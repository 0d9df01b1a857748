"""Metrics module for sweep runs."""
