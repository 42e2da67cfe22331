"""Provide generic helper functions for storage, seeding, and export tasks.

Intended to be largely for internal use.
"""
