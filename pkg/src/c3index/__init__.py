"""C3-index: PageRank-style author ranking on a citation-collaboration network."""

from .corpus import (
    Corpus,
    CorpusError,
    FilterReport,
    PaperRecord,
    SnapshotSpec,
    filter_corpus,
    filter_report,
    parse_records,
    read_corpus,
    snapshot,
)
from .netbuild import MultilayerNetwork, build_multilayer
from .solver import C3Result, ConvergenceLog, ScoreVector, SolverConfig, solve
from .baselines import citation_profile, g_index, h_index

__version__ = "0.1.0"
