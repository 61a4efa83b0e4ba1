"""textvote: ensemble text classification with randomly sampled DNN/CNN
members over TF-IDF and word-embedding features, combined by majority vote.
"""

from .ensemble import (ArchRanges, EnsembleConfig, ModelSpec, TrainedEnsemble,
                       majority_vote, sample_spec, train_ensemble)
from .features import (EmbeddingTable, Vocabulary, build_vocabulary,
                       encode_sequence, load_embeddings, tfidf, tfidf_matrix)
from .metrics import ConfusionMatrix, MetricsReport, confusion, derive_metrics
from .nn import Network, bce_loss, grad_check
from .optim import Adam
from .porter import stem
from .preprocess import (PreprocessConfig, preprocess, remove_stopwords,
                         tokenize)

__version__ = "0.1.0"
