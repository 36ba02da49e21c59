"""Core module for FrozenTree."""
