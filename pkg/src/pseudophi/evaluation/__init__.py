"""Evaluation utilities: label re-categorization, splitting, scoring, significance."""

from .labels import (LabelMap, Token, TokenLabelSequence, default_label_map, load_label_map,
                     read_sequences, remap, write_sequences)
from .overlap import Overlap, gazetteer_overlap
from .scoring import LabelScore, ScoreReport, score
from .stats import ContingencyTable, StatResult, anova_oneway, chi2_sf, f_sf, mcnemar
from .stratify import iterative_stratify, label_proportions, max_deviation

__all__ = [
    "ContingencyTable", "LabelMap", "LabelScore", "Overlap", "ScoreReport", "StatResult",
    "Token", "TokenLabelSequence", "anova_oneway", "chi2_sf", "default_label_map", "f_sf",
    "gazetteer_overlap", "iterative_stratify", "label_proportions", "load_label_map",
    "max_deviation", "mcnemar", "read_sequences", "remap", "score", "write_sequences",
]
