"""End-to-end training and classification over a dataset directory."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .dataio import SymbolData, dump_json, load_dataset, load_json, read_sequence
from .dsp import CepstralConfig, Signal, extract_cepstral_features
from .errors import ArgumentError, FormatError
from .fusion import FusionConfig, ModeDecision, fuse
from .hmm import HmmModel, hmm_fit, hmm_loglik, random_hmm
from .possibility import Algebra
from .pthmm import PthmmModel, pt_fit, pt_forward, random_pthmm
from .vq import Codebook, lbg_train, quantize

__all__ = [
    "PipelineConfig",
    "Bundle",
    "pipeline_train",
    "pipeline_classify",
    "save_bundle",
    "load_bundle",
    "to_features",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1
log = logging.getLogger("ptseq")


@dataclass(frozen=True)
class PipelineConfig:
    family: str = "pthmm"
    algebra: str = "minmax"
    num_states: int = 4
    num_symbols: int = 4
    max_iters: int = 100
    tol: float = 1e-4
    seed: int = 0
    cepstral: CepstralConfig = field(default_factory=CepstralConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)

    def __post_init__(self) -> None:
        if self.family not in ("hmm", "pthmm"):
            raise ArgumentError(f"family must be 'hmm' or 'pthmm', got {self.family!r}")
        object.__setattr__(self, "algebra", Algebra.parse(self.algebra).value)
        if self.num_states < 1 or self.num_symbols < 1:
            raise ArgumentError("num_states and num_symbols must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise FormatError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "cepstral" in d:
                d["cepstral"] = CepstralConfig(**d["cepstral"])
            if "fusion" in d:
                d["fusion"] = FusionConfig(**d["fusion"])
            return cls(**d)
        except TypeError as exc:
            raise FormatError(f"bad config: {exc}") from None

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        return cls.from_dict(load_json(path))


def to_features(seq, config: PipelineConfig):
    """Feature matrix for a raw sequence, or ``SymbolData`` unchanged."""
    if isinstance(seq, SymbolData):
        return seq
    if isinstance(seq, Signal):
        return extract_cepstral_features(seq, config.cepstral)
    return np.asarray(seq, dtype=float)


@dataclass(frozen=True)
class Bundle:
    config: PipelineConfig
    labels: tuple[str, ...]
    codebooks: tuple  # Codebook or None per class
    models: tuple  # HmmModel or PthmmModel per class

    def to_dict(self) -> dict:
        models = []
        for label, m in zip(self.labels, self.models):
            kind = "hmm" if isinstance(m, HmmModel) else "pthmm"
            models.append(
                {
                    "label": label,
                    "kind": kind,
                    "N": m.num_states,
                    "M": m.num_symbols,
                    "transition": m.transition.tolist(),
                    "emission": m.emission.tolist(),
                    "initial": m.initial.tolist(),
                    "algebra": m.algebra.value if kind == "pthmm" else None,
                }
            )
        books = [
            None if b is None else {"label": label, "centroids": b.centroids.tolist()}
            for label, b in zip(self.labels, self.codebooks)
        ]
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "codebooks": books,
            "models": models,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Bundle":
        try:
            if d["format_version"] != FORMAT_VERSION:
                raise FormatError(f"unsupported bundle format_version {d['format_version']!r}")
            config = PipelineConfig.from_dict(d["config"])
            labels, models, books = [], [], []
            for entry, book in zip(d["models"], d["codebooks"], strict=True):
                labels.append(entry["label"])
                if entry["kind"] == "hmm":
                    m = HmmModel(entry["transition"], entry["emission"], entry["initial"])
                elif entry["kind"] == "pthmm":
                    m = PthmmModel(entry["transition"], entry["emission"], entry["initial"], entry["algebra"])
                else:
                    raise FormatError(f"unknown model kind {entry['kind']!r}")
                if (m.num_states, m.num_symbols) != (entry["N"], entry["M"]):
                    raise FormatError(f"model {entry['label']!r}: N/M do not match its matrices")
                models.append(m)
                books.append(None if book is None else Codebook(np.array(book["centroids"], float)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed bundle: {exc!r}") from None
        return cls(config, tuple(labels), tuple(books), tuple(models))


def save_bundle(bundle: Bundle, path) -> None:
    dump_json(bundle.to_dict(), path)


def load_bundle(path) -> Bundle:
    return Bundle.from_dict(load_json(path))


def _class_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(index,)))


def _train_one(config: PipelineConfig, sequences: list[np.ndarray], m: int, rng):
    n = config.num_states
    if config.family == "hmm":
        return hmm_fit(random_hmm(n, m, rng), sequences, max_iters=config.max_iters, tol=config.tol).model
    init = random_pthmm(n, m, rng, config.algebra)
    return pt_fit(init, sequences, max_iters=config.max_iters, tol=config.tol).model


def pipeline_train(config: PipelineConfig, dataset_dir) -> Bundle:
    """Per class: features, LBG codebook of ``num_symbols`` centroids, quantization, model fit.

    Datasets of symbol sequences skip the codebook stage.
    """
    data = load_dataset(dataset_dir)
    labels, books, models = [], [], []
    for index, (label, items) in enumerate(data.items()):
        rng = _class_rng(config.seed, index)
        feats = [to_features(seq, config) for _, seq in items]
        if all(isinstance(f, SymbolData) for f in feats):
            book = None
            symbols = [f.symbols for f in feats]
            top = max(int(s.max()) for s in symbols)
            if top >= config.num_symbols:
                raise ArgumentError(
                    f"class {label!r}: symbol {top} exceeds num_symbols={config.num_symbols}"
                )
        elif any(isinstance(f, SymbolData) for f in feats):
            raise FormatError(f"class {label!r} mixes symbol and feature sequences")
        else:
            dims = {f.shape[1] for f in feats}
            if len(dims) != 1:
                raise FormatError(f"class {label!r}: feature dimensions differ across files: {sorted(dims)}")
            stacked = np.vstack(feats)
            if stacked.shape[0] < config.num_symbols:
                raise ArgumentError(
                    f"class {label!r}: {stacked.shape[0]} feature rows cannot fill {config.num_symbols} centroids"
                )
            book = lbg_train(stacked, config.num_symbols)
            symbols = [quantize(book, f) for f in feats]
        log.info("class %s: %d sequences", label, len(symbols))
        labels.append(label)
        books.append(book)
        models.append(_train_one(config, symbols, config.num_symbols, rng))
    return Bundle(config, tuple(labels), tuple(books), tuple(models))


def _score(model, obs) -> float:
    if isinstance(model, HmmModel):
        return hmm_loglik(model, obs)
    return pt_forward(model, obs).possibility


def classify_sequence(bundle: Bundle, seq) -> list[tuple[str, float]]:
    """Ranked ``(label, score)``; HMM scores are log-likelihoods, PTBHMM scores possibilities."""
    feats = to_features(seq, bundle.config)
    scores = []
    for label, book, model in zip(bundle.labels, bundle.codebooks, bundle.models):
        if isinstance(feats, SymbolData):
            if book is not None:
                raise ArgumentError("bundle expects feature sequences, got symbols")
            obs = feats.symbols
        else:
            if book is None:
                raise ArgumentError("bundle expects symbol sequences, got features")
            obs = quantize(book, feats)
        scores.append((label, _score(model, obs)))
    order = sorted(range(len(scores)), key=lambda k: (-scores[k][1], k))
    return [scores[k] for k in order]


def decision_from_ranking(bundle: Bundle, ranking: list[tuple[str, float]]) -> ModeDecision:
    """Top label with a likelihood in [0, 1].

    PTBHMM possibilities are used directly; HMM log-likelihoods become
    softmax posteriors under uniform class priors.
    """
    label, top = ranking[0]
    if bundle.config.family == "pthmm":
        return ModeDecision(label, min(max(top, 0.0), 1.0))
    logs = np.array([s for _, s in ranking])
    if not np.isfinite(top):
        return ModeDecision(label, 0.0)
    w = np.exp(logs - top)
    return ModeDecision(label, float(1.0 / w.sum()))


@dataclass(frozen=True)
class ClassifyResult:
    ranking: list
    fused: tuple | None = None  # (label, branch)
    decisions: tuple | None = None


def pipeline_classify(bundle: Bundle, sequence_file, fuse_bundle: Bundle | None = None, fuse_file=None) -> ClassifyResult:
    ranking = classify_sequence(bundle, read_sequence(sequence_file))
    if fuse_bundle is None:
        return ClassifyResult(ranking)
    other = classify_sequence(fuse_bundle, read_sequence(fuse_file or sequence_file))
    d1 = decision_from_ranking(bundle, ranking)
    d2 = decision_from_ranking(fuse_bundle, other)
    return ClassifyResult(ranking, fuse(d1, d2, bundle.config.fusion), (d1, d2))
