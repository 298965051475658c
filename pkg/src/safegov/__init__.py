"""safegov: risk-scoring supervisory governor for robot task descriptions.

Classify a natural-language task, blend the class distribution into a
scalar risk score, and gate execution on a threshold - plus the corpus,
simulation, and evaluation tooling around that loop.
"""

from .backends import (
    BackendDescriptor,
    BackendKind,
    LexiconClassifier,
    PortableTransformerClassifier,
    TokenEncoding,
    TokenizerDef,
    build_backend,
)
from .corpus import (
    LabeledExample,
    SplitCorpus,
    load_csv,
    make_fixture_corpus,
    stratified_split,
)
from .errors import (
    BackendLoadError,
    EmptyCorpusError,
    EmptyInputError,
    InferenceError,
    InvalidInputError,
    SafegovError,
    SchemaError,
)
from .evaluation import (
    ConfusionMatrix,
    PredictionRow,
    RiskHistogram,
    confusion,
    metrics,
    risk_histogram,
)
from .governor import (
    DecisionRecord,
    EthicalGovernor,
    GovernorConfig,
    GovernorDecision,
    decide,
)
from .risk import (
    DEFAULT_WEIGHTS,
    RiskBreakdown,
    RiskWeights,
    risk_extrema,
    risk_score,
    softmax,
)
from .simulator import (
    ArmModel,
    Scenario,
    SimOutcome,
    SimResult,
    default_arm,
    forward_kinematics,
    run_scenario,
    run_suite,
)

__version__ = "0.1.0"
