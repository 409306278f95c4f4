#!/usr/bin/env python3
"""Writes the bundled mini-corpus under data/mini.

Three small books built from episode plans. Each episode has its own cast and
places; chapters of one episode share a core of sentence frames plus a few random
extras, so the reference boundaries are the last chapters of each episode.
Output is deterministic.
"""
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data" / "mini"

BOOKS = {
    "book_a": {
        "hero": "Mira",
        "episodes": [
            (7, ["Tobin", "Elsa"], ["Grey Harbor", "lighthouse"], "lantern"),
            (6, ["Captain Vale", "Oren"], ["Saltmarsh", "shipyard"], "compass"),
            (7, ["Queen Ysolde", "Fenn"], ["High Keep", "library"], "crown"),
        ],
    },
    "book_b": {
        "hero": "Arlo",
        "episodes": [
            (6, ["Bram", "Nessa"], ["Millbrook", "orchard"], "letter"),
            (8, ["Doctor Hale", "Iris"], ["Stonebridge", "infirmary"], "ledger"),
            (8, ["Warden Cole", "Pip"], ["Ironwood", "watchtower"], "map"),
        ],
    },
    "book_c": {
        "hero": "Suri",
        "episodes": [
            (6, ["Kasimir", "Lena"], ["Red Canyon", "camp"], "drum"),
            (7, ["Madame Roux", "Theo"], ["Port Amber", "market"], "mask"),
            (6, ["Elder Quill", "Rook"], ["Frost Hollow", "shrine"], "bell"),
        ],
    },
}

VERBS = ["met", "followed", "warned", "greeted", "watched", "trusted", "questioned", "helped", "avoided", "found"]
VERBS_OBJ = ["carried", "hid", "studied", "guarded", "mended", "polished", "traded", "sought"]

# Frame items: (literal or slot, pos, head item, deprel). Head -1 is the root.
FRAMES = [
    [("{hero}", "PROPN", 1, "nsubj"), ("{verb}", "VERB", -1, "root"), ("{p0}", "PROPN", 1, "obj"),
     ("near", "ADP", 5, "case"), ("the", "DET", 5, "det"), ("{l1}", "NOUN", 1, "obl"), (".", "PUNCT", 1, "punct")],
    [("In", "ADP", 1, "case"), ("{l0}", "PROPN", 4, "obl"), (",", "PUNCT", 4, "punct"),
     ("{p1}", "PROPN", 4, "nsubj"), ("{verbo}", "VERB", -1, "root"), ("the", "DET", 6, "det"),
     ("{obj}", "NOUN", 4, "obj"), (".", "PUNCT", 4, "punct")],
    [("{p0}", "PROPN", 1, "nsubj"), ("{verb}", "VERB", -1, "root"), ("{p1}", "PROPN", 1, "obj"),
     ("at", "ADP", 4, "case"), ("dawn", "NOUN", 1, "obl"), (".", "PUNCT", 1, "punct")],
    [("{hero}", "PROPN", 1, "nsubj"), ("{verbo}", "VERB", -1, "root"), ("the", "DET", 3, "det"),
     ("{obj}", "NOUN", 1, "obj"), ("to", "ADP", 5, "case"), ("{l0}", "PROPN", 1, "obl"), (".", "PUNCT", 1, "punct")],
    [("The", "DET", 1, "det"), ("{l1}", "NOUN", 2, "nsubj"), ("stood", "VERB", -1, "root"),
     ("silent", "ADJ", 2, "xcomp"), (".", "PUNCT", 2, "punct")],
    [("{hero}", "PROPN", 1, "nsubj"), ("{verb}", "VERB", -1, "root"), ("{p1}", "PROPN", 1, "obj"),
     ("again", "ADV", 1, "advmod"), (".", "PUNCT", 1, "punct")],
    [("{p0}", "PROPN", 3, "nsubj"), ("and", "CCONJ", 2, "cc"), ("{p1}", "PROPN", 0, "conj"),
     ("left", "VERB", -1, "root"), ("{l0}", "PROPN", 3, "obj"), (".", "PUNCT", 3, "punct")],
    [("{hero}", "PROPN", 1, "nsubj"), ("remembered", "VERB", -1, "root"), ("the", "DET", 3, "det"),
     ("{obj}", "NOUN", 1, "obj"), (".", "PUNCT", 1, "punct")],
    [("Rain", "NOUN", 1, "nsubj"), ("fell", "VERB", -1, "root"), ("on", "ADP", 4, "case"),
     ("the", "DET", 4, "det"), ("{l1}", "NOUN", 1, "obl"), (".", "PUNCT", 1, "punct")],
]
CORE_FRAMES = 6  # every chapter of an episode keeps its cast interacting
MAX_EXTRA_FRAMES = 2
LABELS = {"hero": "PER", "p0": "PER", "p1": "PER", "l0": "LOC", "l1": "LOC", "obj": "OBJ"}


def realize(frame, fill):
    tokens, entities = [], []
    item_token = []  # token index carrying each item's head role
    spans = []
    for text, pos, _, _ in frame:
        if text.startswith("{"):
            slot = text[1:-1]
            words = fill[slot].split()
            start = len(tokens)
            for w in words:
                tokens.append({"text": w, "pos": pos})
            spans.append((start, len(tokens)))
            item_token.append(len(tokens) - 1)
            if slot in LABELS:
                entities.append({"start": start, "end": len(tokens), "label": LABELS[slot]})
        else:
            tokens.append({"text": text, "pos": pos})
            spans.append((len(tokens) - 1, len(tokens)))
            item_token.append(len(tokens) - 1)
    for (start, end), (_, _, head_item, deprel), last in zip(spans, frame, item_token):
        for t in range(start, end - 1):
            tokens[t]["head"] = last + 1
            tokens[t]["deprel"] = "compound"
        tokens[last]["head"] = 0 if head_item < 0 else item_token[head_item] + 1
        tokens[last]["deprel"] = deprel
    return {"tokens": tokens, "entities": entities}


def detok(sentence):
    out = ""
    for t in sentence["tokens"]:
        if out and t["text"] not in ".,":
            out += " "
        out += t["text"]
    return out


def main():
    rng = random.Random(20240611)
    ROOT.mkdir(parents=True, exist_ok=True)
    annotations, references, raw_entries = [], [], []
    for book_id, plan in BOOKS.items():
        chapter = 0
        boundaries = []
        raw = f"{book_id.replace('_', ' ').title()}\nA small synthetic novel.\n\n"
        for length, people, places, obj in plan["episodes"]:
            fill_base = {"hero": plan["hero"], "p0": people[0], "p1": people[1], "l0": places[0], "l1": places[1],
                         "obj": obj}
            for _ in range(length):
                chapter += 1
                sentences = []
                extras = rng.sample(range(CORE_FRAMES, len(FRAMES)), rng.randint(0, MAX_EXTRA_FRAMES))
                picks = sorted(list(range(CORE_FRAMES)) + extras)
                for frame in (FRAMES[i] for i in picks):
                    fill = dict(fill_base, verb=rng.choice(VERBS), verbo=rng.choice(VERBS_OBJ))
                    sentences.append(realize(frame, fill))
                body = " ".join(detok(s) for s in sentences)
                annotations.append({"book_id": book_id, "chapter_index": chapter, "raw_text": body,
                                    "sentences": sentences})
                raw += f"Chapter {chapter}\n{body}\n\n"
            boundaries.append(chapter)
        references.append({"book_id": book_id, "boundaries": boundaries[:-1]})
        (ROOT / f"{book_id}.txt").write_text(raw, encoding="utf-8")
        raw_entries.append({"book_id": book_id, "path": f"{book_id}.txt"})

    with open(ROOT / "annotations.jsonl", "w", encoding="utf-8") as f:
        for a in annotations:
            f.write(json.dumps(a, ensure_ascii=False) + "\n")
    (ROOT / "references.json").write_text(json.dumps(references, indent=2) + "\n", encoding="utf-8")
    config = {
        "seed": 42,
        "paths": {"raw_texts": raw_entries, "annotations": "annotations.jsonl", "references": "references.json",
                  "output_dir": "out"},
        "corpus": {"token_joiner": " "},
        "graph": {"max_path_len": 2, "top_k": 10, "embedding_dim": 32},
        "model": {"n_layers": 2, "hidden_heads": 4, "output_heads": 1, "d_head": 16, "d_z": 16},
        "train": {"epochs": 200, "learning_rate": 0.005},
        "boundary": {"alpha": 5, "beta": 1.5, "safety_distance": 3, "embedding_space": "full"},
        "llm": {"enabled": True, "budget_tokens": 3000, "chars_per_token": 4.0},
        "eval": {"window": 1},
    }
    (ROOT / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
