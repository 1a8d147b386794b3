"""One-class slab support vector machines."""
from .kernels import KernelError, KernelSpec, cross_gram, eval_kernel, gram_matrix, gram_vector, kernel_expansion
from .qp import QpError, QpProblem, QpSolution, SolverConfig, kkt_residuals, solve
from .svm import (
    KktCaseReport,
    NonConvergenceError,
    OcsvmModel,
    SlabError,
    SlabModel,
    SlabTrainConfig,
    classify_kkt_cases,
    compute_offsets,
    load_model,
    ocsvm_predict,
    predict,
    save_model,
    score,
    train_ocsvm,
    train_slab,
)

__version__ = "0.1.0"
