"""Height functions on compact matrix groups and Cartan models of symmetric spaces."""

from .catalog import CATALOG, CatalogEntry, get_entry, load_space, run_paper_suite
from .cayley import (
    FlowTrace,
    cayley,
    chart_space,
    flow_closed_form,
    flow_numeric,
    flow_transversality_demo,
    retract,
)
from .decomposition import (
    adapted_polar,
    adapted_svd,
    critical_blocks_diagonal,
    global_max_polar_test,
    hermitian_square_root_structure,
    is_morse,
    polar,
    reduce_to_diagonal,
    svd_canonical,
)
from .errors import SymflowError
from .height import (
    CriticalPointRecord,
    grad_group,
    grad_model,
    height,
    hessian_model,
    hessian_spectrum,
    is_critical_group,
    is_critical_model,
    xhat,
)
from .oracle import OracleConfig, finite_difference_check, oracle_critical_set
from .scalar_matrix import MatrixK
from .symmetric_space import Automorphism, SymmetricSpaceSpec, apply_sigma, validate_automorphism
from .tolerances import TOL

__version__ = "0.1.0"
