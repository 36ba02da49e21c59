"""Simulation, estimation and reporting services."""
