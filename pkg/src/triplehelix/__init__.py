"""Triple Helix indicators for bibliographic corpora and web hit counts."""

__version__ = "0.1.0"

from .classifier import (  # noqa: E402
    DEFAULT_RULES,
    RuleSet,
    SectorLabel,
    SectorProfile,
    classification_table,
    classify_address,
    profile_document,
)
from .corpus import (
    Address,
    CorpusStats,
    Document,
    corpus_stats,
    extract_country,
    iter_records,
    parse_records,
    read_records,
)
from .errors import (
    DivergenceError,
    HelixError,
    InconsistentCountsError,
    ParseError,
    UnknownSliceError,
)
from .helix import (
    HelixRow,
    VennCells,
    YearlyHits,
    country_counts,
    cube_from_profiles,
    helix_report,
    linear_trend,
    t_trajectory,
    venn_from_inclusive,
)
from .infotheory import (
    ContingencyCube,
    TransmissionReport,
    conditional_entropy,
    entropy,
    expected_info,
    transmission2,
    transmission3,
)
from .systemness import (
    CategorySeries,
    SystemnessReport,
    predict_markov,
    predict_trend,
    row_column_forecast,
    systemness_test,
)
