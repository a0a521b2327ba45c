"""All-NN (deodata delanga): predict from every training row tied for the most attribute matches."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import Dataset, DatasetError, Query, match_count
from .tree_eval import PredictionResult


@dataclass(frozen=True)
class ChampionSet:
    best_match_count: int
    row_indices: frozenset[int]

    def __init__(self, best_match_count: int, row_indices):
        object.__setattr__(self, "best_match_count", best_match_count)
        object.__setattr__(self, "row_indices", frozenset(row_indices))


def champions(dataset: Dataset, query: Query) -> ChampionSet:
    if len(dataset) == 0:
        raise DatasetError("all-NN needs a nonempty dataset")
    dataset.check_query(query)
    scores = [match_count(row, query) for row in dataset.rows]
    best = max(scores)
    return ChampionSet(best, (i for i, s in enumerate(scores) if s == best))


def predict_allnn(dataset: Dataset, query: Query) -> tuple[PredictionResult, ChampionSet]:
    champ = champions(dataset, query)
    dist = dataset.outcome_counts(champ.row_indices)
    result = PredictionResult.of(
        dist,
        leaves_aggregated=0,
        comparisons=len(dataset) * len(dataset.schema),
    )
    return result, champ
