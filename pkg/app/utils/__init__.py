"""Utilities module for the PRUW simulator."""
