"""Pointwise verification of Riemannian-submersion eigenform identities.

The heavy lifting lives in the _vsub extension module; this package
re-exports its operations.
"""

from _vsub import (  # noqa: F401
    bezout,
    catalog,
    cyclic_action_matrices,
    eigen_residual,
    ext,
    fixed_point_data,
    inner,
    interior,
    model_names,
    monte_carlo_rayleigh,
    pullback,
    run_scenario,
    run_scenario_file,
    sample_points,
    theta_omega,
    wedge,
)

__all__ = [
    "bezout",
    "catalog",
    "cyclic_action_matrices",
    "eigen_residual",
    "ext",
    "fixed_point_data",
    "inner",
    "interior",
    "model_names",
    "monte_carlo_rayleigh",
    "pullback",
    "run_scenario",
    "run_scenario_file",
    "sample_points",
    "theta_omega",
    "wedge",
]
