"""Paraphrase generation and quality scoring for algebraic word problems.

The package builds labelled paraphrase pairs with rule-based and
provider-backed operators, trains a hashed n-gram reference encoder with a
contrastive objective, and scores candidate paraphrases by embedding cosine.
"""

from .augment import (NEGATIVE_OPS, POSITIVE_OPS, TRAIN_OPS, AugmentedPair,
                      OpContext, Triplet, apply_operator, applicable,
                      augment_corpus, build_baseline_pairs, build_triplets,
                      pair_label, pairs_to_inbatch_triplets, pseudo_label,
                      read_pairs, read_triplets, write_pairs, write_triplets)
from .corpus import ingest, synth_corpus, write_corpus
from .encoder import (EncoderModel, char_ngram_features, cossim,
                      load_checkpoint, save_checkpoint, score)
from .errors import (AllOpsSkipped, CheckpointError, DuplicateId, EmptyText,
                     LexiconError, NoCandidates, NonFiniteLoss, OperatorSkip,
                     OutOfRange, ParaQDError, ParseError, ProviderMalformedResponse,
                     ProviderUnavailable, SingletonCategory, UnknownUnit,
                     UnlabelledPair, ZeroVector)
from .evaluation import (MetricsReport, ablate_operators, compute_metrics,
                         evaluate, export_embeddings, pca_2d)
from .keyphrase import top_k_phrases
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .provider import (OPS, HttpProvider, ProviderClient, StdioProvider,
                       StubProvider, make_provider)
from .testset import (TEST_OPS, TestPair, apply_test_operator, build_testset,
                      read_test_pairs, write_test_pairs)
from .text import Question, analyze, number_to_words, normalize_space
from .tfidf import TfidfIndex
from .training import (SeedSearchReport, SparseAdamW, TrainConfig, TrainReport,
                       gradient_check, mnrl_batch_loss, schedule_lr,
                       seed_search, train, triplet_batch_loss)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
