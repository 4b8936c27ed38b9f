"""Texture estimation for single-look G0 (GP-II) speckle data."""
