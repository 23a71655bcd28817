"""Scope-aware inline code completion engine.

Subsystems: scope detection (`scopes`), trigger policy (`trigger`),
generation post-processing (`postprocess`), pluggable model backends
(`backend`), the JSON-RPC completion server (`server`), the serving-tier
simulator (`simulator`), and the replay/metrics harness (`replay`,
`metrics`).
"""

from .document import Cursor, Document, LanguageFamily, insertion_end, parse_family
from .scopes import (
    LineContext,
    ScopeConfig,
    ScopeKind,
    ScopeNode,
    ScopeTree,
    StaleTreeError,
    innermost_scope,
    is_at_end_of_scope,
    line_context,
    parse_document,
    scope_chain,
)
from .trigger import (
    CloserSet,
    GenerationLimits,
    GenerationParams,
    MultiLineReason,
    NotebookCell,
    RequestOrigin,
    TriggerConfig,
    TriggerDecision,
    TriggerKind,
    decide_trigger,
    generation_params_for,
)
from .postprocess import (
    CutReason,
    ScopeCutMonitor,
    TruncatedSuggestion,
    realign_indentation,
    truncate_to_scope,
)
from .backend import (
    CancelToken,
    FimPrompt,
    GenerationStream,
    HttpBackend,
    MockBackend,
    MockCorpus,
    StreamStatus,
    build_fim_prompt,
    context_fingerprint,
    token_count,
)
from .cache import SuggestionCache, make_cache_key
from .config import ConfigError, EngineConfig, load_config
from .server import CompletionEngine, StdioServer
from .simulator import (
    BatchConfig,
    LatencyModel,
    QosMode,
    QosPolicy,
    SimReport,
    SimRequest,
    WorkloadMix,
    run_simulation,
    sample_workload,
)
from .replay import (
    SessionMetrics,
    SessionScript,
    derive_script,
    make_corpus_for_file,
    replay_session,
)
from .metrics import MetricsReport, aggregate, aggregate_sink_files
from .telemetry import TelemetryEvent, TelemetryKind, TelemetrySink, read_telemetry

__version__ = "0.1.0"
