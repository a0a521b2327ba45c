"""Interfering-path decision trees, the all-NN predictor, and their hybrid."""

from .allnn import ChampionSet, predict_allnn
from .dataset import (MISSING, AttributeSchema, ContractViolation, Dataset, DatasetError,
                      OutcomeDistribution, Query, TrainingRow, argmax_label, load_csv, match_count,
                      table1_fixture)
from .hybrid import CostCounter, HybridTree, build_hybrid, predict_allnn_naive_cost, predict_hybrid
from .tree import (FixedTreeSpec, SplitCriterion, TreeNode, build_fixed_tree, build_tree, entropy,
                   gain_ratio, information_gain, subtree_outcomes)
from .tree_eval import PredictionResult, predict_interfering, predict_standard

__version__ = "0.1.0"
