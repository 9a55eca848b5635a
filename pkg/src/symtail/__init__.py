"""Symmetric-polynomial tail bounds and limited-independence hash families."""
