"""Two-agent situated-dialogue harness.

Agents hold private knowledge (friend lists or item-value tables), estimate
first- and second-order beliefs about the joint solution before speaking,
and talk until they align on a mutual friend or strike a deal. The package
covers scenario generation, the self-talk prompt pipeline, deterministic
scripted/replay backends, gold belief annotation, metrics, and a human-play
HTTP service.
"""

from .model import (
    AgentConfig,
    AttributeSchema,
    Decision,
    DEFAULT_SCHEMA,
    FriendCard,
    FriendList,
    ItemValue,
    MindMode,
    Priority,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    Utterance,
    ValueTable,
    validate_scenario,
)
from .beliefs import (
    BeliefParseError,
    CanonicalDeal,
    DealBelief,
    DealSplit,
    FriendBelief,
    diff,
    format_belief,
    format_deal,
    format_friend_belief,
    parse_deal_belief,
    parse_deal_split,
    parse_friend_belief,
)
from .engine import (
    InvalidDeal,
    check_mutual_friend,
    enumerate_deals,
    is_pareto_optimal,
    score_deal,
    session_points,
    validate_deal,
)
from .scenarios import (
    AlignmentGenParams,
    NegotiationGenParams,
    generate_alignment,
    generate_negotiation,
    load_scenarios,
    save_scenarios,
)
from .backends import (
    BackendError,
    BackendRegistry,
    CachingBackend,
    ChatMessage,
    ChatRequest,
    EchoBackend,
    HttpBackendConfig,
    HttpChatBackend,
    RecordingBackend,
    ReplayBackend,
)
from .scripted import ScriptedAgentBackend
from .mind import PromptKit, estimate_beliefs
from .orchestrator import (
    ExperimentCell,
    ExperimentSpec,
    cells_for_modes,
    export_finetune,
    rerun_from_record,
    run_batch,
    run_dialogue,
)
from .records import (
    AlignmentOutcome,
    BeliefSnapshot,
    NegotiationOutcome,
    PromptEvent,
    SessionRecord,
    read_records,
    replay_view,
    write_records,
)
from .annotator import (
    GoldBelief,
    PredictionScore,
    annotate,
    annotate_record,
    evaluate_mind,
    score,
    score_recorded,
)
from .metrics import (
    AlignmentReport,
    NegotiationReport,
    alignment_report,
    negotiation_report,
)

__version__ = "0.1.0"
