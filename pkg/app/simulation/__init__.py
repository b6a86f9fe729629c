from app.simulation.simulator import Simulation, SimulationResult, run_scenario

__all__ = ["Simulation", "SimulationResult", "run_scenario"]
