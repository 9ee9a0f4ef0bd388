from .corpus import Corpus, build_corpus, encode_row, phrase_tokens, textualize
from .model import BridgeConfig, load_bridge, save_bridge, train_bridge
from .scoring import score_candidates
from .server import create_app
from .tokenizer import Vocab, value_tokens

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "Corpus",
    "Vocab",
    "build_corpus",
    "create_app",
    "encode_row",
    "load_bridge",
    "phrase_tokens",
    "save_bridge",
    "score_candidates",
    "textualize",
    "train_bridge",
    "value_tokens",
    "__version__",
]
