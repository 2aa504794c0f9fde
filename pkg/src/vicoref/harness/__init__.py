"""Few-shot prompting, model calls with record/replay, and reply parsing."""

from .client import (
    Cassette,
    CassetteMiss,
    Completion,
    ModelConfig,
    RateLimited,
    RetryPolicy,
    TransportError,
    complete,
)
from .prompt import (
    PROMPT_VERSION,
    BudgetExceeded,
    FewShotExemplar,
    TokenBudget,
    build_fewshot_prompt,
    build_final_prompt,
    estimate_tokens,
)
from .response import Consistency, ParsedResponse, normalize_clusters, parse_response
from .runner import EvaluationRun, ModelExchange, RunConfig, run_evaluation

__all__ = [
    "Cassette",
    "CassetteMiss",
    "Completion",
    "ModelConfig",
    "RateLimited",
    "RetryPolicy",
    "TransportError",
    "complete",
    "PROMPT_VERSION",
    "BudgetExceeded",
    "FewShotExemplar",
    "TokenBudget",
    "build_fewshot_prompt",
    "build_final_prompt",
    "estimate_tokens",
    "Consistency",
    "ParsedResponse",
    "normalize_clusters",
    "parse_response",
    "EvaluationRun",
    "ModelExchange",
    "RunConfig",
    "run_evaluation",
]
