"""Random-architecture ensemble: d DNN members over TF-IDF vectors plus
c CNN members over embedding-index sequences, each trained independently
with Adam and combined by the floor-formula majority vote.

Per-model seeds are master_seed XOR model_index, so any member can be
retrained in isolation and training order (or parallelism) cannot change
the result.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .nn import Network
from .optim import Adam, NonFiniteGradient


class TrainingError(RuntimeError):
    pass


@dataclass
class ArchRanges:
    """Inclusive bounds for randomly sampled architectures."""
    dnn_layers: tuple[int, int] = (1, 3)
    dnn_units: tuple[int, int] = (64, 512)
    cnn_conv_layers: tuple[int, int] = (1, 2)
    cnn_filters: tuple[int, int] = (32, 128)
    cnn_kernel: tuple[int, int] = (3, 7)
    cnn_pool: int = 2
    cnn_dense: tuple[int, int] = (64, 256)
    dropout: tuple[float, float] = (0.0, 0.5)

    def validate(self):
        for name in ("dnn_layers", "dnn_units", "cnn_conv_layers",
                     "cnn_filters", "cnn_kernel", "cnn_dense", "dropout"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range {(lo, hi)} is not ordered")


@dataclass
class EnsembleConfig:
    d: int = 3
    c: int = 0
    ranges: ArchRanges = field(default_factory=ArchRanges)
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    head: str = "sigmoid"
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    bias_correction: bool = True

    @property
    def n(self) -> int:
        return self.d + self.c

    def validate(self):
        if self.n < 1:
            raise ValueError("need at least one model (d + c >= 1)")
        self.ranges.validate()
        if self.n % 2 == 0:
            warnings.warn(
                f"even ensemble size n={self.n}: exact ties vote class 0; "
                "an odd n avoids ties"
            )


@dataclass
class ModelSpec:
    family: str  # "dnn" or "cnn"
    layers: list[dict]
    seed: int


def majority_vote(votes) -> int:
    """floor(1/2 + (sum(votes) - 1/2) / n), in exact integer arithmetic.

    Equivalent to "1 iff more than half the votes are 1"; exact ties
    (even n) land on class 0.
    """
    n = len(votes)
    if n == 0:
        raise ValueError("empty vote vector")
    s = int(sum(votes))
    # floor(1/2 + (s - 1/2)/n) == (n + 2s - 1) // (2n)
    return (n + 2 * s - 1) // (2 * n)


def sample_spec(rng: np.random.Generator, family: str, ranges: ArchRanges,
                model_seed: int) -> ModelSpec:
    """Draw layer counts and sizes uniformly (inclusive) from the ranges."""
    def ri(lo_hi):
        return int(rng.integers(lo_hi[0], lo_hi[1] + 1))

    drop = float(rng.uniform(ranges.dropout[0], ranges.dropout[1]))
    layers: list[dict] = []
    if family == "dnn":
        for _ in range(ri(ranges.dnn_layers)):
            layers.append({"kind": "dense", "units": ri(ranges.dnn_units)})
            layers.append({"kind": "relu"})
            if drop > 0:
                layers.append({"kind": "dropout", "rate": drop})
    elif family == "cnn":
        for _ in range(ri(ranges.cnn_conv_layers)):
            layers.append({"kind": "conv1d", "filters": ri(ranges.cnn_filters),
                           "width": ri(ranges.cnn_kernel)})
            layers.append({"kind": "relu"})
            layers.append({"kind": "maxpool1d", "width": ranges.cnn_pool})
        layers.append({"kind": "flatten"})
        layers.append({"kind": "dense", "units": ri(ranges.cnn_dense)})
        layers.append({"kind": "relu"})
        if drop > 0:
            layers.append({"kind": "dropout", "rate": drop})
    else:
        raise ValueError(f"unknown family {family!r}")
    return ModelSpec(family=family, layers=layers, seed=model_seed)


def sample_ensemble_specs(config: EnsembleConfig,
                          embedding_rows: int | None = None,
                          embedding_dim: int | None = None) -> list[ModelSpec]:
    """One spec per member: d DNNs then c CNNs, all from the master seed."""
    rng = np.random.default_rng(config.seed)
    specs = []
    for i in range(config.n):
        family = "dnn" if i < config.d else "cnn"
        spec = sample_spec(rng, family, config.ranges, model_seed=config.seed ^ i)
        if family == "cnn":
            spec.layers.insert(0, {"kind": "embedding",
                                   "rows": embedding_rows,
                                   "dim": embedding_dim})
        specs.append(spec)
    return specs


def _train_one(spec: ModelSpec, X, y, config: EnsembleConfig, input_shape,
               embedding_init, index: int):
    net = Network(spec.layers, input_shape, head=config.head, seed=spec.seed,
                  embedding_init=embedding_init)
    opt = Adam(net.params, lr=config.lr, beta1=config.beta1, beta2=config.beta2,
               eps=config.eps, bias_correction=config.bias_correction)
    rng = np.random.default_rng(spec.seed)
    n = X.shape[0]
    curve = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss = net.loss_and_backward(X[batch], y[batch], training=True)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"model {index} (seed {spec.seed}): non-finite loss "
                    f"at epoch {epoch}"
                )
            try:
                opt.step(net.grads)
            except NonFiniteGradient as e:
                raise TrainingError(
                    f"model {index} (seed {spec.seed}): {e} at epoch {epoch}"
                ) from e
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return net, curve


class TrainedEnsemble:
    def __init__(self, config: EnsembleConfig, specs: list[ModelSpec],
                 models: list[Network], loss_curves: list[list[float]]):
        self.config = config
        self.specs = specs
        self.models = models
        self.loss_curves = loss_curves

    def predict_votes(self, X_tfidf, X_seq) -> np.ndarray:
        """(n_samples, n_models) matrix of binary per-member votes."""
        cols = []
        for i, net in enumerate(self.models):
            X = X_tfidf if self.specs[i].family == "dnn" else X_seq
            if X is None:
                raise ValueError(
                    f"model {i} is a {self.specs[i].family} but its feature "
                    "matrix is missing"
                )
            cols.append(net.predict(X))
        return np.stack(cols, axis=1)

    def predict(self, X_tfidf, X_seq) -> np.ndarray:
        votes = self.predict_votes(X_tfidf, X_seq)
        return np.array([majority_vote(row) for row in votes])

    def save(self, dirpath: str) -> None:
        os.makedirs(dirpath, exist_ok=True)
        cfg = asdict(self.config)
        manifest = {
            "config": cfg,
            "models": [
                {"file": f"model_{i:03d}.net", "family": s.family,
                 "seed": s.seed, "layers": s.layers}
                for i, s in enumerate(self.specs)
            ],
            "loss_curves": self.loss_curves,
        }
        with open(os.path.join(dirpath, "manifest.json"), "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        for i, net in enumerate(self.models):
            net.save(os.path.join(dirpath, f"model_{i:03d}.net"))

    @classmethod
    def load(cls, dirpath: str) -> "TrainedEnsemble":
        with open(os.path.join(dirpath, "manifest.json")) as f:
            manifest = json.load(f)
        cfg_dict = dict(manifest["config"])
        ranges = cfg_dict.pop("ranges")
        config = EnsembleConfig(
            ranges=ArchRanges(**{k: tuple(v) if isinstance(v, list) else v
                                 for k, v in ranges.items()}),
            **cfg_dict,
        )
        specs, models = [], []
        for entry in manifest["models"]:
            specs.append(ModelSpec(family=entry["family"], layers=entry["layers"],
                                   seed=entry["seed"]))
            models.append(Network.load(os.path.join(dirpath, entry["file"])))
        return cls(config, specs, models, manifest["loss_curves"])


def train_ensemble(X_tfidf, X_seq, y, config: EnsembleConfig,
                   embedding_matrix=None, jobs: int = 1,
                   progress=None) -> TrainedEnsemble:
    """Train every member independently; result does not depend on jobs.

    X_tfidf feeds the d DNN members, X_seq the c CNN members;
    embedding_matrix (rows, dim) initializes each CNN's embedding layer.
    """
    config.validate()
    y = np.asarray(y, dtype=np.int64)
    if config.c > 0:
        if X_seq is None or embedding_matrix is None:
            raise ValueError("c > 0 requires sequence features and an embedding matrix")
    if config.d > 0 and X_tfidf is None:
        raise ValueError("d > 0 requires a TF-IDF matrix")
    specs = sample_ensemble_specs(
        config,
        embedding_rows=None if embedding_matrix is None else embedding_matrix.shape[0],
        embedding_dim=None if embedding_matrix is None else embedding_matrix.shape[1],
    )

    def run(i):
        spec = specs[i]
        if spec.family == "dnn":
            X, shape, init = X_tfidf, (X_tfidf.shape[1],), None
        else:
            X, shape, init = X_seq, (X_seq.shape[1],), embedding_matrix
        result = _train_one(spec, X, y, config, shape, init, i)
        if progress is not None:
            progress(i, result[1])
        return result

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(config.n)))
    else:
        results = [run(i) for i in range(config.n)]
    models = [r[0] for r in results]
    curves = [r[1] for r in results]
    return TrainedEnsemble(config, specs, models, curves)
