"""Toolkit for additive structural causal models: simulate interventional
regimes, estimate joint intervention effects from observational plus
single-intervention data, and verify the underlying identities exactly on
finite models."""

__version__ = "0.1.0"

from .noise import FAMILIES, NoiseSpec
from .polynomials import PolynomialMechanism, monomial_exponents
from .regression import (
    CvConfig,
    FeatureMap,
    RidgeModel,
    cv_select_lambda,
    expand_features,
    fit_polynomial_cv,
    fit_ridge,
    fit_ridge_cv,
    rmse,
)
from .scm import (
    Dataset,
    Regime,
    Scm,
    dataset_from_csv,
    dataset_to_csv,
    joint_effect_exact,
    make_matched_intervention_spec,
    sample_dataset,
    true_joint_effect,
    true_joint_effect_mc,
)
from .estimators import (
    Baselines,
    IgEstimator,
    PartitionedIgEstimator,
    SupportWarning,
    fit_baselines,
    fit_partitioned,
)
from .discrete import (
    DiscreteScm,
    DistributionTable,
    enumerate_distribution,
    random_conforming_scm,
    verify_counterexample,
    verify_lemma_identities,
)

__all__ = [
    "FAMILIES",
    "NoiseSpec",
    "PolynomialMechanism",
    "monomial_exponents",
    "CvConfig",
    "FeatureMap",
    "RidgeModel",
    "cv_select_lambda",
    "expand_features",
    "fit_polynomial_cv",
    "fit_ridge",
    "fit_ridge_cv",
    "rmse",
    "Dataset",
    "Regime",
    "Scm",
    "dataset_from_csv",
    "dataset_to_csv",
    "joint_effect_exact",
    "make_matched_intervention_spec",
    "sample_dataset",
    "true_joint_effect",
    "true_joint_effect_mc",
    "Baselines",
    "IgEstimator",
    "PartitionedIgEstimator",
    "SupportWarning",
    "fit_baselines",
    "fit_partitioned",
    "DiscreteScm",
    "DistributionTable",
    "enumerate_distribution",
    "random_conforming_scm",
    "verify_counterexample",
    "verify_lemma_identities",
]
