"""Test suite for the PRUW simulator."""
