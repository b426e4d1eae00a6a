"""Biharmonic transmission problems on a two-piece cylinder.

Semigroup representation solver for the coupled fourth-order interface
problem, with a functional-calculus route through the scalar determinant
symbol and an independent finite-difference oracle.
"""

from .errors import (
    AnomalyError,
    BranchCutError,
    ConfigError,
    DimensionMismatchError,
    EvaluationError,
    HypothesisViolationError,
    InvalidGeometryError,
    ResolutionError,
    SolverError,
    SymmetryError,
)
from .oracle import (
    ErrorMetrics,
    ExactCase,
    ForcedCase,
    OracleSolution,
    RateTable,
    compare,
    convergence_study,
    direct_solve,
    manufactured_forced,
    manufactured_homogeneous,
)
from .problem import (
    SIDE_MINUS,
    SIDE_PLUS,
    SIDES,
    BoundaryData,
    CylinderGeometry,
    ModalForcing,
    TransmissionProblem,
)
from .section_operator import (
    GeneratorM,
    OperatorMatrix,
    SectionOperator,
    apply_function,
    build_dirichlet_laplacian_1d,
    from_matrix,
    from_matrix_file,
    read_matrix_file,
    semigroup,
    square_root_generator,
)
from .subproblem import (
    ParticularSolution,
    SideOperators,
    SubproblemSolution,
    alphas_minus,
    alphas_plus,
    build_side_operators,
    phi_tilde_minus,
    phi_tilde_plus,
    solve_particular,
)
from .symbols import (
    PositivityScan,
    SymbolContext,
    f_components,
    f_tilde,
    f_total,
    positivity_scan,
    u_delta,
    v_delta,
)
from .transmission import (
    InterfaceData,
    InterfaceSources,
    ResidualReport,
    SolveOptions,
    TransmissionOperators,
    TransmissionSolution,
    assemble_P,
    assemble_UV,
    assemble_sources,
    assemble_transmission_operators,
    leading_order_interface,
    residual_report,
    solve_interface_block,
    solve_interface_calculus,
    solve_transmission,
)

__version__ = "0.1.0"
