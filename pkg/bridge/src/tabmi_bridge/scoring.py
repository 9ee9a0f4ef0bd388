"""Candidate scoring: summed value-token log-probabilities.

The prompt is the textualized context followed by ", <target> is "; each
candidate's logit is the sum (or mean, if length-normalized) of the model's
log-probabilities over the candidate's value tokens given that prompt.
"""
from __future__ import annotations

import torch
from transformers import GPT2LMHeadModel

from .corpus import phrase_tokens
from .tokenizer import COMMA, Vocab, value_tokens, word_tokens


def prompt_ids(vocab: Vocab, context: list[tuple[str, str]],
               target: str) -> list[int]:
    toks: list[str] = []
    for feature, value in context:
        pt, _ = phrase_tokens(feature, value)
        toks += pt + [COMMA]
    toks += word_tokens(target) + ["is"]
    return [vocab.bos_id] + vocab.encode_all(toks)


@torch.no_grad()
def score_candidates(
    model: GPT2LMHeadModel,
    vocab: Vocab,
    context: list[tuple[str, str]],
    target: str,
    candidates: list[str],
    length_normalize: bool = False,
) -> list[float]:
    prefix = prompt_ids(vocab, context, target)
    logits: list[float] = []
    for cand in candidates:
        ids = vocab.encode_all(value_tokens(cand))
        full = torch.tensor([prefix + ids], dtype=torch.long)
        out = model(input_ids=full).logits[0]
        logprobs = torch.log_softmax(out, dim=-1)
        # token ids[j] is predicted at position len(prefix) + j - 1
        total = sum(
            float(logprobs[len(prefix) + j - 1, t]) for j, t in enumerate(ids)
        )
        if length_normalize and ids:
            total /= len(ids)
        logits.append(total)
    return logits
