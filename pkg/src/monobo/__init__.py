"""Bayesian optimization with decomposed objectives and monotonicity-
constrained Gaussian process surrogates."""

from .acquisition import Candidate, expected_improvement, maximize_ei, propose_next
from .bo_loop import (
    EvaluationRecord,
    Problem,
    TrialTrace,
    initial_design,
    run_trial,
    run_trials,
)
from .composite import (
    ComponentSpec,
    Strategy,
    SurrogateStack,
    default_grid_resolution,
    fit_stack,
    predict_sum,
)
from .errors import (
    ComponentArityError,
    ExternalObjectiveError,
    FitError,
    MalformedResponseError,
    MonoboError,
    NumericError,
    ProcessFailedError,
    ProcessTimeoutError,
    TrialError,
)
from .gp_core import (
    FittedGp,
    GpHyperparameters,
    PosteriorSummary,
    TrainingSet,
    log_marginal_likelihood,
    make_fitted,
)
from .gp_core import fit as fit_gp
from .gp_core import predict as predict_gp
from .gp_mono import (
    FittedMonoGp,
    VirtualGrid,
    ep_log_marginal,
    ep_posterior,
    fit_mono,
    make_virtual_grid,
    predict_mono,
)
from .kernel import DerivativeIndex
from .problems import (
    ElasticNetProblem,
    ElasticTuningProblem,
    ExternalObjectiveSpec,
    ExternalProblem,
    IllustrativeProblem,
    Transform,
    elastic_net_fit,
    elastic_objective,
    external_evaluate,
    generate_elastic_data,
    illustrative_components,
    load_problem_descriptor,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "ComponentArityError",
    "ComponentSpec",
    "DerivativeIndex",
    "ElasticNetProblem",
    "ElasticTuningProblem",
    "EvaluationRecord",
    "ExternalObjectiveError",
    "ExternalObjectiveSpec",
    "ExternalProblem",
    "FitError",
    "FittedGp",
    "FittedMonoGp",
    "GpHyperparameters",
    "IllustrativeProblem",
    "MalformedResponseError",
    "MonoboError",
    "NumericError",
    "PosteriorSummary",
    "Problem",
    "ProcessFailedError",
    "ProcessTimeoutError",
    "Strategy",
    "SurrogateStack",
    "TrainingSet",
    "Transform",
    "TrialError",
    "TrialTrace",
    "VirtualGrid",
    "default_grid_resolution",
    "elastic_net_fit",
    "elastic_objective",
    "ep_log_marginal",
    "ep_posterior",
    "expected_improvement",
    "external_evaluate",
    "fit_gp",
    "fit_mono",
    "fit_stack",
    "generate_elastic_data",
    "illustrative_components",
    "initial_design",
    "load_problem_descriptor",
    "log_marginal_likelihood",
    "make_fitted",
    "make_virtual_grid",
    "maximize_ei",
    "predict_gp",
    "predict_mono",
    "predict_sum",
    "propose_next",
    "run_trial",
    "run_trials",
]
