"""Fuel-delivery vehicle routing: random construction plus simulated annealing."""

from .anneal import SaParams, anneal, generate, improve_solution
from .construct import McParams, best_of, initial
from .exact import export_mip, solve_exact
from .feasibility import Route, Solution, check_route, check_solution, route_distance, schedule
from .instance import (
    DayPlan,
    Fleet,
    InfeasibleInstance,
    Instance,
    InstanceError,
    LoadPolicy,
    Matrices,
    aggregate_day,
    generate_instance,
    load_instance,
    validate,
)
from .solver import SolverParams, solve, solve_day

__all__ = [
    "DayPlan", "Fleet", "InfeasibleInstance", "Instance", "InstanceError", "LoadPolicy", "Matrices",
    "McParams", "Route", "SaParams", "Solution", "SolverParams", "aggregate_day", "anneal", "best_of",
    "check_route", "check_solution", "export_mip", "generate", "generate_instance", "improve_solution",
    "initial", "load_instance", "route_distance", "schedule", "solve", "solve_day", "solve_exact", "validate",
]
