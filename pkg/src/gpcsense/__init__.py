"""Sensitivity analysis of black-box classifiers under input perturbations.

Fits a polynomial chaos surrogate to model outputs sampled over a
perturbation parameter space (Latin hypercube over Beta-distributed
variables) and decomposes the output variance into Sobol indices of every
interaction order.  Probability outputs are analyzed through the logit
link.
"""

from .basis import BasisSet, JacobiParams, build_basis, eval_multivariate, jacobi_eval, jacobi_norm_sq
from .randomspace import (
    ParameterSpace,
    RandomParameter,
    SampleMatrix,
    beta_icdf,
    destandardize,
    lhs_unit,
    sample,
    standardize,
)
from .surrogate import (
    FitInfo,
    LinkSpec,
    Surrogate,
    design_matrix,
    fit,
    load_surrogate,
    logistic,
    logit,
    nrmsd,
    predict,
    save_surrogate,
)
from .sobol import SobolReport, compute_sobol, validate_report
from .perturb import Image, PerturbationSpec, PerturbStep, apply, brightness, read_png, rotate, tilt, write_png
from .adapter import EvalRecord, EvaluatorConfig, attach_logits, evaluate_batch
from .benchmarks import gfunction, ishigami, run_benchmark

__version__ = "0.1.0"
