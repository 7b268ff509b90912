"""
Test package for hazcell.
"""
