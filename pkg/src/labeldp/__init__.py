from .__about__ import __version__
from .audit import AuditReport, analytic_audit, empirical_audit
from .baselines import (
    AdditiveNoiseSpec,
    NoiseKind,
    gaussian_randomize,
    laplace_randomize,
    make_noise_spec,
)
from .density import (
    DensityMode,
    StepDensity,
    cdf,
    integrate,
    make_step_density,
    pdf_at,
    restrict_to_bounds,
    sample_density,
)
from .errors import LabelDPError
from .mechanism import (
    PolicyKind,
    RandomizerSpec,
    build_randomizer,
    conditional_density,
    neighborhood_mass,
    sample,
    sample_many,
)
from .optimizer import (
    CriticalPoints,
    Interval,
    OptimizationResult,
    critical_points,
    grid_search_interval,
    objective_F,
    objective_gradient,
    optimal_interval,
)
from .pipeline import (
    LabeledDataset,
    PipelineReport,
    PrivacyBudgetSplit,
    empirical_mse,
    expected_mechanism_mse,
    monte_carlo_mse,
    privatize_dataset,
    split_budget,
)
from .prior import HistogramPlan, estimate_prior
from .results import NOTHING, Err, Nothing, Ok, Option, Result, Some
from .streams import RandomStream

__all__ = [
    "__version__",
    "analytic_audit",
    "build_randomizer",
    "cdf",
    "conditional_density",
    "critical_points",
    "empirical_audit",
    "empirical_mse",
    "estimate_prior",
    "expected_mechanism_mse",
    "gaussian_randomize",
    "grid_search_interval",
    "integrate",
    "laplace_randomize",
    "make_noise_spec",
    "make_step_density",
    "monte_carlo_mse",
    "neighborhood_mass",
    "objective_F",
    "objective_gradient",
    "optimal_interval",
    "pdf_at",
    "privatize_dataset",
    "restrict_to_bounds",
    "sample",
    "sample_density",
    "sample_many",
    "split_budget",
    "AdditiveNoiseSpec",
    "AuditReport",
    "CriticalPoints",
    "DensityMode",
    "Err",
    "HistogramPlan",
    "Interval",
    "LabelDPError",
    "LabeledDataset",
    "NoiseKind",
    "Nothing",
    "Ok",
    "OptimizationResult",
    "Option",
    "PipelineReport",
    "PolicyKind",
    "PrivacyBudgetSplit",
    "RandomStream",
    "RandomizerSpec",
    "Result",
    "Some",
    "StepDensity",
    "NOTHING",
]
