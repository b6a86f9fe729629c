"""
MANET routing simulator with MRP protocol switching
"""

__version__ = "1.0.0"
