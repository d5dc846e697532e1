from ._opx import (
    EquilibriumMeasure,
    NumericalError,
    ValidationError,
    airy,
    airy_kernel,
    bulk_axis,
    bump,
    edge_poly,
    edge_scales,
    recurrence,
    run_cli,
    sine_kernel,
    solve_equilibrium,
    statphase,
)

__all__ = [
    "EquilibriumMeasure",
    "NumericalError",
    "ValidationError",
    "airy",
    "airy_kernel",
    "bulk_axis",
    "bump",
    "edge_poly",
    "edge_scales",
    "recurrence",
    "run_cli",
    "sine_kernel",
    "solve_equilibrium",
    "statphase",
]
