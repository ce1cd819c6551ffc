"""Binary sparse recovery by reduction to QUBO/Ising models.

Recovers binary sparse signals from few linear measurements by minimizing
||y - Ax||^2 + lambda*||x||_0 over x in {0,1}^n through an exact QUBO
construction, classical annealing-surrogate backends, an alternating
minimization scheme for measurement-matrix uncertainty, and a model of
annealer hardware constraints (coefficient ranges, precision, sparse
topology, chain embedding).
"""

from .errors import (BinaryCSError, CapacityError, DegenerateColumnError,
                     DimensionError, DomainError, EmbeddingError, NumericError,
                     ParseError, RangeError, ScheduleError, SizeError,
                     SparsityError, ValidationError)
from .instances import (BinarySignal, CSInstance, MeasurementMatrix,
                        UncertainCSInstance, default_lambda, gen_matrix,
                        gen_planted, gen_uncertain_planted, load_instance,
                        load_truth, save_instance)
from .qubo import (IsingModel, QuboModel, bits_to_spins, build_qubo,
                   dumps_model, ising_energy, load_model, loads_model,
                   objective, qubo_energy, qubo_to_ising, save_model,
                   spins_to_bits)
from .solvers import (AnnealSchedule, SolveResult, default_schedule,
                      solve_exhaustive, solve_local, solve_qubo, solve_sa)
from .uncertainty import (IterationRecord, RecoveryTrace, assemble_A,
                          build_Gc, recover, solve_d, uncertain_objective)
from .hardware import (EmbeddingMap, HardwareGraph, cell_clique_embedding,
                       chimera, embed, load_embedding, normalize, quantize,
                       save_embedding, unembed, validate_embedding)
from .diagnostics import (RecoveryMetrics, mutual_coherence, recovery_metrics,
                          rip_constant, verify_uniqueness)

__all__ = [
    "AnnealSchedule", "BinaryCSError", "BinarySignal", "CSInstance",
    "CapacityError", "DegenerateColumnError", "DimensionError", "DomainError",
    "EmbeddingError", "EmbeddingMap", "HardwareGraph", "IsingModel",
    "IterationRecord", "MeasurementMatrix", "NumericError", "ParseError",
    "QuboModel", "RangeError", "RecoveryMetrics", "RecoveryTrace",
    "ScheduleError", "SizeError", "SolveResult", "SparsityError",
    "UncertainCSInstance", "ValidationError",
    "assemble_A", "bits_to_spins", "build_Gc", "build_qubo",
    "cell_clique_embedding", "chimera", "default_lambda", "default_schedule",
    "dumps_model", "embed", "gen_matrix", "gen_planted",
    "gen_uncertain_planted", "ising_energy", "load_embedding", "load_instance",
    "load_model", "load_truth", "loads_model", "mutual_coherence", "normalize",
    "objective", "quantize", "qubo_energy", "qubo_to_ising", "recover",
    "recovery_metrics", "rip_constant", "save_embedding", "save_instance",
    "save_model", "solve_d", "solve_exhaustive", "solve_local", "solve_qubo",
    "solve_sa", "spins_to_bits", "uncertain_objective", "unembed",
    "validate_embedding", "verify_uniqueness",
]
