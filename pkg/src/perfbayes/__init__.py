"""Categorical naive Bayes for predicting student result divisions from
marginal count tables."""

from .evaluation import ConfusionMatrix, EvalReport, evaluate, split
from .grid import (
    GridRow,
    OutcomePolicy,
    diff_grid,
    enumerate_profiles,
    load_published_grid,
    parse_grid,
    prediction_grid,
    render_grid,
)
from .ingest import (
    ConsistencyReport,
    ParseError,
    RecordDataset,
    aggregate,
    audit_consistency,
    load_training_tables,
    parse_records,
    parse_tables,
    write_records,
    write_tables,
)
from .model import (
    REPLICATION_POLICY,
    FitError,
    NBModel,
    PosteriorResult,
    dumps_model,
    fit,
    likelihood,
    loads_model,
    posterior,
    posterior_exact,
    predict,
)
from .schema import (
    AttributeSchema,
    ClassLabelSet,
    Explicit,
    InputError,
    MarginalTable,
    MarginalTableSet,
    PerAttribute,
    Profile,
    Reference,
    SchemaError,
    SmoothingConfig,
    resolve_class_totals,
    validate_schema,
)

__version__ = "0.1.0"
