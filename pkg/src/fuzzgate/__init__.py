"""fuzzgate: a desk-scale lab for ML-filtered black-box API testing.

A simulated rule-based registry service, a schema-driven random request
generator, a feature pipeline, a from-scratch random forest with three
baselines, a predict-before-execute filter gate, and a factorial
experiment harness with nonparametric statistics.
"""

from .catalog import Catalog, generate_catalog
from .config import LabConfig
from .features import FeatureMatrix, FeatureSchema, build_features, refine, split
from .forest import ForestHyperparams, RandomForestModel, train_forest
from .gate import FilterStats, cost_reduction, gated_execute, run_filtered_campaign
from .generator import GeneratorConfig, MixProbabilities, generate_request, run_collection
from .metrics import ConfusionCounts, classification_metrics, rank_auc
from .rules import CancerCase, CancerMessage, Rule, RuleSet, evaluate_rule, parse_rule
from .service import RegistryService, ServiceConfig
from .stats import coverage, mann_whitney, pearson, vargha_delaney_a12

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CancerCase",
    "CancerMessage",
    "ConfusionCounts",
    "FeatureMatrix",
    "FeatureSchema",
    "FilterStats",
    "ForestHyperparams",
    "GeneratorConfig",
    "LabConfig",
    "MixProbabilities",
    "RandomForestModel",
    "RegistryService",
    "Rule",
    "RuleSet",
    "ServiceConfig",
    "build_features",
    "classification_metrics",
    "cost_reduction",
    "coverage",
    "evaluate_rule",
    "gated_execute",
    "generate_catalog",
    "generate_request",
    "mann_whitney",
    "parse_rule",
    "pearson",
    "rank_auc",
    "refine",
    "run_collection",
    "run_filtered_campaign",
    "split",
    "train_forest",
    "vargha_delaney_a12",
    "__version__",
]
