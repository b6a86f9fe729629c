"""Scenario files, traces, sweeps, CSV exports and plots around the simulator."""
