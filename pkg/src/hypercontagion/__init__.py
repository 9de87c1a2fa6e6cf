"""Edge-based SIS/SIR contagion on hypergraphs, network activities and adaptive normalisation."""

from .activity import (ActivityReport, beta_hat_k, combinatorial_activity, exact_activity,
                       normalize_beta1)
from .adaptive import AdaptiveConfig, PairedRunResult, paired_run, update_beta1, xi
from .contagion import (Compartment, DiseaseParams, ScalingSpec, Simulation, Trajectory,
                        edge_infection_prob, initial_states, iterate_once, run, scaling_f, step)
from .hypergraph import (Hypergraph, clique_complex, generate_complete, generate_er,
                         generate_triangular_lattice, hyperedge_counts, load, save)
from .reference import OdeParams, abm_params_from_ode, integrate, kgamma_from_scm, ode_rhs

__version__ = "0.1.0"

__all__ = [
    "ActivityReport", "beta_hat_k", "combinatorial_activity", "exact_activity", "normalize_beta1",
    "AdaptiveConfig", "PairedRunResult", "paired_run", "update_beta1", "xi",
    "Compartment", "DiseaseParams", "ScalingSpec", "Simulation", "Trajectory",
    "edge_infection_prob", "initial_states", "iterate_once", "run", "scaling_f", "step",
    "Hypergraph", "clique_complex", "generate_complete", "generate_er",
    "generate_triangular_lattice", "hyperedge_counts", "load", "save",
    "OdeParams", "abm_params_from_ode", "integrate", "kgamma_from_scm", "ode_rhs",
]
