"""corpusforge: corpus selection and synthetic-data engineering for ASR
domain adaptation."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Corpus, DomainTermSet, NormalizationRules, Sentence, Token,
    count_domain_terms, extract_domain_terms, load_corpus, save_corpus, tokenize,
)
from .selection import (  # noqa: F401
    Budget, DurationModel, SelectionState, Weights, estimate_duration,
    greedy_select, muss_select,
)
from .wer import Alignment, EvalReport, align, evaluate  # noqa: F401
