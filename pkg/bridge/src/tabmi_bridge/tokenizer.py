"""Word/character hybrid vocabulary for textualized rows.

Feature names and categorical values are word tokens; numeric-looking
values are split into characters so unseen numbers (e.g. bin midpoints
proposed at scoring time) still map onto known digit tokens.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
PAD = "<pad>"
COMMA = ","
SPECIALS = (PAD, BOS, EOS, UNK, COMMA)


def is_numeric(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def value_tokens(value: str) -> list[str]:
    """Tokenize one value: characters if numeric, whitespace words otherwise."""
    if is_numeric(value):
        return list(value)
    return value.split()


def word_tokens(text: str) -> list[str]:
    return text.split()


@dataclass
class Vocab:
    tokens: list[str] = field(default_factory=lambda: list(SPECIALS))

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def add(self, token: str) -> int:
        if token not in self._index:
            self._index[token] = len(self.tokens)
            self.tokens.append(token)
        return self._index[token]

    def encode(self, token: str) -> int:
        return self._index.get(token, self._index[UNK])

    def encode_all(self, toks: list[str]) -> list[int]:
        return [self.encode(t) for t in toks]

    def decode(self, idx: int) -> str:
        return self.tokens[idx]

    @property
    def pad_id(self) -> int:
        return self._index[PAD]

    @property
    def bos_id(self) -> int:
        return self._index[BOS]

    @property
    def eos_id(self) -> int:
        return self._index[EOS]

    def to_json(self) -> str:
        return json.dumps({"tokens": self.tokens})

    @classmethod
    def from_json(cls, text: str) -> "Vocab":
        return cls(tokens=json.loads(text)["tokens"])
