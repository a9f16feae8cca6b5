"""Isospectrally patterned lattices: build, diagonalize, analyze.

Chains of 2x2 cells that all share the eigenvalues {d1, d2} but differ in
their rotation phase. The phase profile alone decides where states localize,
which states pair up, and how much of a band delocalizes; this package builds
the resulting tridiagonal operators, diagonalizes them with certified bounds,
and reduces the eigensystems to localization measures, band subdomains, and
near-degeneracy multiplets, with deterministic CSV/PGM/JSON artifacts.
"""

from ._version import __version__
from .rng import SplitMix64
from .profiles import (QUARTER_TURN, PROFILE_KINDS, ProfileSpec, PhaseProfile,
                       OnsiteSequence, realize_profile, linear_profile,
                       asymmetric_profile, constant_profile, revolution_profile,
                       random_phase_profile, random_onsite_sequence)
from .hamiltonian import (CellParams, CellMatrix, cell_matrix, cell_matrix_psi,
                          coupling_block, TridiagonalHamiltonian, assemble,
                          assemble_onsite)
from .eigensolver import (EigenSystem, SolverError, eigh_tridiagonal, dense_oracle,
                          node_count, eigenvalue_count_below)
from .measures import (StateMeasures, SpacingSpectrum, ipr, cfs, center_of_mass,
                       edge_weights, spacing_spectrum, state_measures)
from .analysis import (AnalysisThresholds, BandPartition, SubdomainLabels,
                       Multiplet, MultipletReport, EigenstateMap, SpectralReport,
                       detect_bands, classify_states, delocalized_fraction,
                       detect_multiplets, eigenstate_map, analyze, smooth,
                       monotonicity_changes)
from .experiments import (Preset, PRESETS, RunConfig, RunManifest, SweepPoint,
                          OracleCheckResult, build_hamiltonian, run_config,
                          execute, run_preset, preset_config, sweep_lf, run_sweep,
                          replay, load_manifest, oracle_check, random_instance,
                          resolve_selection)

__all__ = [name for name in dir() if not name.startswith("_")]
