"""Python access to the afrisynth pipeline core."""

import json as _json

from ._afrisynth import (  # noqa: F401
    Error,
    MinHashSignature,
    content_id,
    decontaminate,
    dedup,
    estimate_jaccard,
    exact_match,
    extract_final_answer,
    minhash,
    parse_verdict,
    run_stage,
    shingles,
    stages,
    truncate_words,
    word_count,
)
from ._afrisynth import score_run_json as _score_run_json


def score_run(items, verdicts, excluded=("eng", "fra")):
    """items: dicts with item_id/language; verdicts: (item_id, score, scored) tuples."""
    return _json.loads(_score_run_json(list(items), list(verdicts), set(excluded)))
