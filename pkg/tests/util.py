"""Shared builders for tests."""

from __future__ import annotations

import random

from flowner.model import Corpus, Document, Entity, EntityLabel, Span

# Published per-label occurrence counts for the 52-article reference corpus.
TABLE1_COUNTS = {
    "Data": 2434, "Tool": 1482, "Description": 1300, "Biblio": 1251,
    "Method": 936, "WorkflowName": 851, "File": 780, "Parameter": 464,
    "Version": 454, "Hardware": 429, "Database": 288, "ManagementSystem": 243,
    "Container": 108, "ProgrammingLanguage": 104, "LibraryPackage": 101,
    "Environment": 83,
}

OVERALL_FOCUSED_LABELS = ["Tool", "Biblio", "Version", "LibraryPackage",
                          "ProgrammingLanguage", "Environment"]


def ent(ent_id: str, base: str, start: int, end: int, text: str,
        qualifier=None) -> Entity:
    return Entity(id=ent_id, label=EntityLabel(base, qualifier),
                  fragments=(Span(start, end),), surface=text[start:end])


def doc_of(doc_id: str, text: str, *entities: Entity, **kwargs) -> Document:
    return Document(doc_id=doc_id, text=text, entities=tuple(entities), **kwargs)


def synthetic_table1_corpus(seed: int = 7, n_docs: int = 52,
                            nested_pairs: int = 905) -> Corpus:
    """A corpus with exactly the published per-label counts.

    ``nested_pairs`` of the entities are placed strictly inside a
    two-word container entity, so the nested count is exactly
    ``nested_pairs`` (905/11308 = 0.080, matching the ~8% the reference
    corpus reports).  Everything else sits on its own word, disjoint.
    """
    rng = random.Random(seed)
    labels = [base for base, count in sorted(TABLE1_COUNTS.items())
              for _ in range(count)]
    rng.shuffle(labels)

    items: list[tuple] = []
    idx = 0
    for _ in range(nested_pairs):
        items.append(("nested", labels[idx], labels[idx + 1]))
        idx += 2
    for base in labels[idx:]:
        items.append(("single", base))
    rng.shuffle(items)

    buckets: list[list[tuple]] = [[] for _ in range(n_docs)]
    for i, item in enumerate(items):
        buckets[i % n_docs].append(item)

    documents = []
    for d, bucket in enumerate(buckets):
        words: list[str] = []
        entities: list[Entity] = []
        pos = 0

        def add_word(word: str) -> tuple[int, int]:
            nonlocal pos
            if words:
                pos += 1  # joining space
            start = pos
            words.append(word)
            pos += len(word)
            return start, pos

        for item in bucket:
            n = len(entities)
            if item[0] == "single":
                s, e = add_word("entity")
                entities.append(Entity(f"T{n + 1}", EntityLabel(item[1]),
                                       (Span(s, e),), "entity"))
            else:
                _, outer_base, inner_base = item
                s1, e1 = add_word("inner")
                s2, e2 = add_word("word")
                entities.append(Entity(f"T{n + 1}", EntityLabel(outer_base),
                                       (Span(s1, e2),), "inner word"))
                entities.append(Entity(f"T{n + 2}", EntityLabel(inner_base),
                                       (Span(s1, e1),), "inner"))
        documents.append(Document(doc_id=f"article{d:02d}", text=" ".join(words),
                                  entities=tuple(entities)))
    return Corpus(name="synthetic-biotoflow", documents=tuple(documents))
