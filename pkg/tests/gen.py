"""Seeded random generators for documents, corpora and entities.

All generation goes through an explicit ``random.Random`` so failures
reproduce.  Texts mix ASCII, accented and non-Latin words; entities may
be nested, overlapping and discontinuous, the way the real corpus is.
"""

from __future__ import annotations

import random

from flowner.model import Corpus, Document, Entity, EntityLabel, Provenance, Span
from flowner.schema import BIOTOFLOW

ALL_LABELS = sorted(BIOTOFLOW.labels)
TOOL_QUALIFIERS = sorted(BIOTOFLOW.qualifiers["Tool"])

WORDS = [
    "reads", "aligned", "genome", "pipeline", "samtools", "workflow",
    "variant", "calling", "données", "génome", "ανάλυση", "последовательность",
    "配列", "čeština", "Qualität", "naïve", "co-assembly", "v1.2",
    "fastq.gz", "results", "cluster", "σ-factor",
]


def random_text(rng: random.Random, n_words: int = 30) -> str:
    parts = []
    for _ in range(n_words):
        parts.append(rng.choice(WORDS))
        if rng.random() < 0.15:
            parts.append(rng.choice([",", ".", ";", "(", ")"]))
    return " ".join(parts)


def _random_fragments(rng: random.Random, text_len: int,
                      discontinuous: bool) -> tuple[Span, ...]:
    n_frags = rng.choice([2, 3]) if discontinuous and text_len >= 12 else 1
    fragments = []
    cursor = rng.randrange(0, max(1, text_len - 4 * n_frags))
    for _ in range(n_frags):
        if cursor >= text_len:
            break
        length = rng.randint(1, min(8, text_len - cursor))
        fragments.append(Span(cursor, cursor + length))
        cursor += length + rng.randint(1, 4)
    return tuple(fragments)


def random_entities(rng: random.Random, text: str, max_entities: int,
                    labels=ALL_LABELS, discontinuous_rate: float = 0.15,
                    with_qualifiers: bool = False) -> tuple[Entity, ...]:
    entities = []
    seen_fragsets = set()
    for i in range(rng.randint(0, max_entities)):
        fragments = _random_fragments(rng, len(text),
                                      rng.random() < discontinuous_rate)
        if not fragments or fragments in seen_fragsets:
            continue
        seen_fragsets.add(fragments)
        base = rng.choice(labels)
        qualifier = None
        if with_qualifiers and base == "Tool" and rng.random() < 0.5:
            qualifier = rng.choice(TOOL_QUALIFIERS)
        surface = " ".join(text[f.start:f.end] for f in fragments)
        entities.append(Entity(id=f"T{i + 1}", label=EntityLabel(base, qualifier),
                               fragments=fragments, surface=surface))
    return tuple(entities)


def random_sidecar(rng: random.Random, entity_ids: list[str]) -> tuple[str, ...]:
    # Notes and relations only: attribute lines naming registered qualifiers
    # would be consumed into entity qualifiers on reparse.
    lines = []
    for i in range(rng.randint(0, 3)):
        if entity_ids and rng.random() < 0.5 and len(entity_ids) >= 2:
            a, b = rng.sample(entity_ids, 2)
            lines.append(f"R{i + 1}\tUses Arg1:{a} Arg2:{b}")
        else:
            lines.append(f"#{i + 1}\tAnnotatorNotes note {rng.randint(0, 99)}")
    return tuple(lines)


def random_document(rng: random.Random, doc_id: str, n_words: int = 30,
                    max_entities: int = 8, labels=ALL_LABELS,
                    with_qualifiers: bool = True,
                    with_sidecar: bool = True) -> Document:
    text = random_text(rng, n_words)
    entities = random_entities(rng, text, max_entities, labels,
                               with_qualifiers=with_qualifiers)
    sidecar = random_sidecar(rng, [e.id for e in entities]) if with_sidecar else ()
    return Document(doc_id=doc_id, text=text, entities=entities,
                    provenance=rng.choice(list(Provenance)), sidecar=sidecar)


def random_match_instance(rng: random.Random, max_gold: int = 6, max_pred: int = 6,
                          ) -> tuple[tuple[Entity, ...], tuple[Entity, ...]]:
    """Small dense gold/pred entity sets for matcher stress tests.

    A short text and two labels force plenty of overlap and label
    collisions, which is where matching gets interesting.
    """
    text_len = rng.randint(10, 40)
    labels = ["Tool", "Data"]

    def some_entities(max_n: int) -> tuple[Entity, ...]:
        entities = []
        seen = set()
        for i in range(rng.randint(0, max_n)):
            fragments = _random_fragments(rng, text_len, rng.random() < 0.2)
            if not fragments:
                continue
            key = fragments
            if key in seen:
                continue
            seen.add(key)
            entities.append(Entity(id=f"T{i + 1}",
                                   label=EntityLabel(rng.choice(labels)),
                                   fragments=fragments,
                                   surface="x"))
        return tuple(entities)

    return some_entities(max_gold), some_entities(max_pred)


def random_corpus_pair(rng: random.Random, n_docs: int = 3,
                       ) -> tuple[Corpus, Corpus]:
    """Gold and pred corpora over the same doc_ids, for score properties."""
    gold_docs, pred_docs = [], []
    for d in range(n_docs):
        text = random_text(rng, rng.randint(10, 30))
        doc_id = f"doc{d}"
        labels = ["Tool", "Data", "Version"]
        gold = random_entities(rng, text, 6, labels)
        pred = random_entities(rng, text, 6, labels)
        gold_docs.append(Document(doc_id=doc_id, text=text, entities=gold))
        pred_docs.append(Document(doc_id=doc_id, text=text, entities=pred))
    return Corpus("gold", tuple(gold_docs)), Corpus("pred", tuple(pred_docs))
