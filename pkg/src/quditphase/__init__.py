"""Phases of two-qudit pure states under local unitary evolutions.

Simulates sampled local-unitary paths acting on d x d state matrices,
computes total, dynamical and geometric phases, and verifies that cyclic
evolutions with a nonsingular state matrix pick up phases on the lattice
2*pi*n/d, labeling d homotopy classes.

Hot kernels run on a compiled extension when available; set
``QUDITPHASE_KERNELS=python`` (or ``c``) to force a backend.
"""

from .backend import BACKEND, available_backends
from .errors import QuditPhaseError
from .evolution import (
    PhaseTrace,
    UnitaryPath,
    compute_phase_trace,
    dyn_term_integrand,
    dynamical_phase,
    evolve,
    geometric_phase,
    identity_path,
    pancharatnam_phase,
    qubit_euler_path,
    qubit_geometric_phase_closed_form,
    qubit_overlap_closed_form,
    qutrit_piecewise_overlap_maxent,
    qutrit_piecewise_path,
    random_su_path,
    read_phase_trace_csv,
    solid_angle,
    total_phase,
    vn_overlap_closed_form,
    vn_path,
    with_u1_phases,
    write_phase_trace_csv,
)
from .matcore import expm_iherm, herm_eig, polar_decompose
from .qstate import (
    PolarSectors,
    TwoQuditState,
    concurrence,
    det_invariant,
    invariant,
    load_state,
    make_state,
    max_concurrence,
    overlap,
    polar_sectors,
    qhat,
    reduced_density,
    save_state,
    vn_aligned_state,
)
from .sud import GeneratorBasis, adjoint_rep, decompose_hermitian, generators, structure_constants, vn_generator
from .topology import (
    CycleReport,
    check_cyclic,
    homotopy_class,
    orthogonality_crossings,
    unwrap_phase_trace,
)

__version__ = "0.1.0"
