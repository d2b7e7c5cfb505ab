"""
Test suite for the anisotropic walk verification engine
Run with: pytest tests/
Desk-scale acceptance runs: pytest tests/ -m slow
"""
