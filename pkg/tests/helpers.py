from __future__ import annotations

import random
from pathlib import Path

from vicoref.corpus import load_corpus
from vicoref.harness import Cassette, FewShotExemplar, TokenBudget, build_fewshot_prompt, build_final_prompt
from vicoref.transform import index_document

DATA = Path(__file__).parent / "data"
CORPUS = DATA / "corpus"
EXEMPLAR_IDS = ("ex1", "ex2", "ex3")

EXCERPT_ANNOTATED = (
    "{M1 Em} trân trọng {M2 hai người bạn} rất thân; {M2 các bạn} bị {M3 một nhóm bạn khác} "
    "nói xấu rất nhiều, từ tính cách, lời nói, dáng đi. {M1 Em} chắc chắn trước đó {M2 hai bạn} "
    "không đả động gì tới {M3 nhóm bạn đó}..."
)
EXCERPT_INDEXED = (
    "[Em]#1 trân trọng [hai người bạn]#2 rất thân; [các bạn]#3 bị [một nhóm bạn khác]#4 "
    "nói xấu rất nhiều, từ tính cách, lời nói, dáng đi. [Em]#5 chắc chắn trước đó [hai bạn]#6 "
    "không đả động gì tới [nhóm bạn đó]#7..."
)
EXCERPT_GOLD = [[1, 5], [2, 3, 6], [4, 7]]

# three clean replies, one wrapped in chatter, one useless
REPLIES = {
    "d1": "[(1, 2)]",
    "d2": "[(1, 5), (2, 3, 6), (4, 7)]",
    "d3": "[(1, 2, 3)]",
    "d4": "Sure! Here is the result: [(1, 3), (2,)] Hope it helps.",
    "d5": "I am not sure which mentions refer to the same entity.",
}


def fixture_split():
    docs = {item.doc.doc_id: item.doc for item in load_corpus(CORPUS)}
    exemplars = [docs[i] for i in EXEMPLAR_IDS]
    evaluation = [d for k, d in sorted(docs.items()) if k not in EXEMPLAR_IDS]
    return exemplars, evaluation


def write_cassette(path: Path, replies: dict[str, str], budget: TokenBudget = TokenBudget(8192)) -> None:
    exemplars, evaluation = fixture_split()
    fewshot = build_fewshot_prompt([FewShotExemplar.from_document(d) for d in exemplars])
    cassette = Cassette(path)
    for doc in evaluation:
        if doc.doc_id in replies:
            prompt = build_final_prompt(fewshot, index_document(doc), budget)
            cassette.append(prompt, replies[doc.doc_id], model="fixture", attempts=1, latency_s=0.25)


WORDS = (
    "tôi anh chị em mẹ bố bạn người nhóm con cái chồng vợ thầy cô ông bà "
    "đi làm ăn nói thấy nghĩ rất thường sáng nay hôm qua ở trong với cho "
    "Hà Nội Sài Gòn công ty trường học nhà"
).split()
PUNCT = ("", "", "", ",", ".", ";", "...")


def random_sacr(rng: random.Random, max_mentions: int = 8, nested: bool = True) -> str:
    """Canonical SACR markup with random words, nesting and tag numbers."""
    n_tags = rng.randint(1, 4)

    def words(k):
        return " ".join(rng.choice(WORDS) + rng.choice(PUNCT) for _ in range(k))

    def mention(depth):
        tag = rng.randint(1, n_tags)
        if nested and depth < 2 and rng.random() < 0.25:
            inner = mention(depth + 1)
            return f"{{M{tag} {words(rng.randint(1, 2))} của {inner}}}"
        return f"{{M{tag} {words(rng.randint(1, 3))}}}"

    parts = []
    for _ in range(rng.randint(0, max_mentions)):
        parts.append(words(rng.randint(0, 4)))
        parts.append(mention(0))
    parts.append(words(rng.randint(0, 5)))
    return " ".join(p for p in parts if p)
