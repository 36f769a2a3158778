"""events2constraints: a toy-scale seq2seq constraint generator.

Trains a small encoder-decoder transformer on exported (activity list ->
constraint) pairs and answers per-type queries with beam-searched,
probability-scored candidate constraints in the gateway JSONL format.
"""

from .beam import Candidate, beam_search, candidates_jsonl, generate_file
from .data import Pair, PairFormatError, Vocab, detokenize, load_pairs, tokenize
from .model import GenConfig, Seq2SeqTransformer
from .train import load_checkpoint, train

__version__ = "0.1.0"
