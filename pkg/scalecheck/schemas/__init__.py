"""
Schemas package.

This package contains the Pydantic schema models.
"""
