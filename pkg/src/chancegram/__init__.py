"""chancegram: are your n-grams more frequent than chance allows?

A toolkit that estimates one-sided permutation-test p-values for 2- to
4-grams by repeatedly shuffling the whole corpus, applies Holm's
correction per n-gram length, scores the same n-grams with six lexical
association measures, and evaluates each measure's ranking against the
significance gold standard with precision-recall curves, average
precision, and chance-corrected average precision.
"""

from .corpus import (
    NONWORD,
    WORD,
    IngestError,
    TokenStream,
    Vocabulary,
    ingest_plain,
    ingest_vertical,
    read_token_file,
    write_token_file,
)
from .evaluate import (
    EvalError,
    EvalReport,
    RankedList,
    average_precision,
    baseline_ap,
    chance_corrected_ap,
    first_reject_recall,
    pr_curve,
    rank,
)
from .exact import ContingencyTable2x2, OracleError, enumerate_exact, fisher_exact_upper
from .measures import (
    MEASURES,
    MeasureError,
    ScoreRecord,
    expected_freq,
    mi,
    mi3,
    score_table,
    simple_ll,
    t_score,
    z_score,
)
from .multitest import MtcError, SignificanceTable, apply_holm, holm
from .ngram import NgramTable, build_table, count_ngrams, extract
from .permute import (
    PermutationPlan,
    PValueTable,
    TallyTable,
    p_value,
    pvalue_tables,
    run,
    shuffle_stream,
    tally_permutation,
)
from .pipeline import PipelineError, RunConfig, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "NONWORD",
    "WORD",
    "IngestError",
    "TokenStream",
    "Vocabulary",
    "ingest_plain",
    "ingest_vertical",
    "read_token_file",
    "write_token_file",
    "NgramTable",
    "build_table",
    "count_ngrams",
    "extract",
    "MEASURES",
    "MeasureError",
    "ScoreRecord",
    "expected_freq",
    "mi",
    "mi3",
    "score_table",
    "simple_ll",
    "t_score",
    "z_score",
    "ContingencyTable2x2",
    "OracleError",
    "enumerate_exact",
    "fisher_exact_upper",
    "PermutationPlan",
    "PValueTable",
    "TallyTable",
    "p_value",
    "pvalue_tables",
    "run",
    "shuffle_stream",
    "tally_permutation",
    "MtcError",
    "SignificanceTable",
    "apply_holm",
    "holm",
    "EvalError",
    "EvalReport",
    "RankedList",
    "average_precision",
    "baseline_ap",
    "chance_corrected_ap",
    "first_reject_recall",
    "pr_curve",
    "rank",
    "PipelineError",
    "RunConfig",
    "run_pipeline",
    "__version__",
]
