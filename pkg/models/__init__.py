"""Pydantic models that validate input files and the suite configuration before any numerics run"""
