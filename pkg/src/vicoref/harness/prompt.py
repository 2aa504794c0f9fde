"""Few-shot prompt assembly and token budgeting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..core import AnnotatedDocument, ClusterSet, CorefError, IndexedDocument
from ..transform import build_gold_clusters, index_document

PROMPT_VERSION = "v1"

# Bump PROMPT_VERSION whenever either text changes; runs record the version.
PREAMBLE = (
    "You are given Vietnamese texts in which every mention of a person or a group "
    "of people is written as [mention]#k, where k is the index of the mention. "
    "Group the indices of mentions that refer to the same entity. Answer with a "
    "list of clusters only, one list of indices per entity, covering every index, "
    "in the same format as the examples."
)
REQUEST = "Return the full output for the following text, in the same format and with nothing else."


class BudgetExceeded(CorefError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"estimated {estimate} tokens exceeds the budget of {budget}")
        self.estimate = estimate
        self.budget = budget


@dataclass(frozen=True)
class FewShotExemplar:
    indexed_text: str
    gold_clusters: ClusterSet

    @classmethod
    def from_document(cls, doc: AnnotatedDocument) -> "FewShotExemplar":
        return cls(index_document(doc).indexed_text, build_gold_clusters(doc))


def build_fewshot_prompt(exemplars: Sequence[FewShotExemplar], preamble: str = PREAMBLE) -> str:
    if not exemplars:
        raise ValueError("a few-shot prompt needs at least one exemplar")
    blocks = [preamble]
    for ex in exemplars:
        blocks.append(f"Input: {ex.indexed_text}\nOutput: {ex.gold_clusters.serialize()}")
    return "\n\n".join(blocks)


@dataclass(frozen=True)
class TokenBudget:
    """Character-ratio token estimate; no tokenizer is consulted.

    The estimate covers the prompt plus room for the expected answer, since
    the endpoint limit applies to both.
    """

    max_tokens: int
    chars_per_token: float = 4.0
    safety_margin: float = 0.1
    reserve_output: bool = True

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise ValueError("token budget must be positive")
        if self.chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")


def estimate_tokens(text: str, budget: TokenBudget, n_mentions: int = 0) -> int:
    chars = len(text)
    if budget.reserve_output:
        # the all-singletons answer is the longest well-formed reply
        chars += len(ClusterSet.singletons(n_mentions).serialize())
    return math.ceil(chars / budget.chars_per_token * (1 + budget.safety_margin))


def build_final_prompt(fewshot: str, target: IndexedDocument, budget: TokenBudget | int) -> str:
    if isinstance(budget, int):
        budget = TokenBudget(budget)
    prompt = f"{fewshot}\n\n{REQUEST}\n\nInput: {target.indexed_text}\nOutput:"
    estimate = estimate_tokens(prompt, budget, target.n_mentions)
    if estimate > budget.max_tokens:
        raise BudgetExceeded(estimate, budget.max_tokens)
    return prompt
