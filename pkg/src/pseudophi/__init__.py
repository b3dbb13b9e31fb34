"""Replace redaction masks in de-identified clinical text with realistic pseudo text."""

from .corpus import CorpusCensus, NoteRecord, census, normalize, synthesize
from .generators import GenerationContext, Generator, GeneratorConfig, generate
from .masks import MaskToken, RuleTable, TagKind, TagRule, classify, default_rule_table, scan_line
from .pseudodb import GazetteerEntry, PseudoDatabase, load, load_sample
from .rng import RandomStream

__version__ = "0.1.0"

__all__ = [
    "CorpusCensus", "GazetteerEntry", "GenerationContext", "Generator", "GeneratorConfig",
    "MaskToken", "NoteRecord", "PseudoDatabase", "RandomStream", "RuleTable", "TagKind",
    "TagRule", "census", "classify", "default_rule_table", "generate", "load", "load_sample",
    "normalize", "scan_line", "synthesize",
]
