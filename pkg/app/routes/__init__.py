"""
Routes package for the analysis endpoints.
"""
