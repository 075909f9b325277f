"""Windowed feed-forward token tagger with a shared feature extractor,
an NER head, and a per-token domain-discriminator head.

Tokens are lowercased and hashed (64-bit FNV-1a, modulo the vocabulary
size) into an embedding table. Each token's feature vector is a tanh
layer over the concatenated embeddings of a fixed window around it; a
dedicated padding row covers positions beyond sentence boundaries. Both
heads are linear maps on the same features.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import autodiff as ad
from .corpus import Region, TAG_ALPHABET
from .errors import ConfigError, DataError, ShapeError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1

CHECKPOINT_VERSION = 1


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    return h


@dataclass
class TaggerConfig:
    vocab_size: int = 2**15
    embed_dim: int = 64
    hidden_dim: int = 128
    context_window: int = 2
    n_tags: int = len(TAG_ALPHABET)
    n_domains: int = len(Region)
    seed: int = 0

    def validate(self):
        for name in ("vocab_size", "embed_dim", "hidden_dim", "context_window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_tags != len(TAG_ALPHABET):
            raise ConfigError(f"n_tags is fixed to {len(TAG_ALPHABET)}")
        if self.n_domains != len(Region):
            raise ConfigError(f"n_domains is fixed to {len(Region)}")

    @property
    def input_dim(self) -> int:
        return (2 * self.context_window + 1) * self.embed_dim

    @property
    def pad_id(self) -> int:
        # the extra embedding row used beyond sentence boundaries
        return self.vocab_size


@dataclass
class TaggerParams:
    """Parameter store with an explicit, disjoint three-way partition."""

    config: TaggerConfig
    extractor: dict[str, np.ndarray]
    ner_head: dict[str, np.ndarray]
    domain_head: dict[str, np.ndarray]

    def groups(self) -> dict[str, dict[str, np.ndarray]]:
        return {
            "extractor": self.extractor,
            "ner_head": self.ner_head,
            "domain_head": self.domain_head,
        }

    def items_flat(self) -> Iterable[tuple[tuple[str, str], np.ndarray]]:
        for group_name, group in self.groups().items():
            for name, arr in group.items():
                yield (group_name, name), arr

    def n_parameters(self) -> dict[str, int]:
        counts = {g: sum(a.size for a in arrays.values()) for g, arrays in self.groups().items()}
        counts["total"] = sum(counts.values())
        return counts

    def copy(self) -> "TaggerParams":
        return TaggerParams(
            config=self.config,
            extractor={k: v.copy() for k, v in self.extractor.items()},
            ner_head={k: v.copy() for k, v in self.ner_head.items()},
            domain_head={k: v.copy() for k, v in self.domain_head.items()},
        )

    def save(self, path: str | Path) -> None:
        meta = {"version": CHECKPOINT_VERSION, "config": asdict(self.config)}
        arrays = {f"{g}.{n}": arr for (g, n), arr in self.items_flat()}
        with open(path, "wb") as fh:
            np.savez(fh, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                     **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "TaggerParams":
        with np.load(path) as data:
            if "__meta__" not in data:
                raise DataError(f"{path}: not a tagger checkpoint")
            meta = json.loads(bytes(data["__meta__"]).decode())
            if meta.get("version") != CHECKPOINT_VERSION:
                raise DataError(f"{path}: unsupported checkpoint version {meta.get('version')}")
            config = TaggerConfig(**meta["config"])
            params = init_params(config)
            for (group, name), arr in params.items_flat():
                key = f"{group}.{name}"
                if key not in data:
                    raise DataError(f"{path}: missing parameter {key}")
                loaded = data[key]
                if loaded.shape != arr.shape:
                    raise DataError(
                        f"{path}: parameter {key} has shape {loaded.shape}, expected {arr.shape}"
                    )
                arr[...] = loaded
        return params


def init_params(config: TaggerConfig) -> TaggerParams:
    """Seeded uniform init scaled by 1/sqrt(fan_in); zero biases."""
    config.validate()
    rng = np.random.default_rng(config.seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    extractor = {
        "embed": uniform((config.vocab_size + 1, config.embed_dim), config.embed_dim),
        "w_hidden": uniform((config.input_dim, config.hidden_dim), config.input_dim),
        "b_hidden": np.zeros(config.hidden_dim),
    }
    ner_head = {
        "w": uniform((config.hidden_dim, config.n_tags), config.hidden_dim),
        "b": np.zeros(config.n_tags),
    }
    domain_head = {
        "w": uniform((config.hidden_dim, config.n_domains), config.hidden_dim),
        "b": np.zeros(config.n_domains),
    }
    return TaggerParams(config, extractor, ner_head, domain_head)


def featurize(token_texts: Sequence[str], vocab_size: int) -> np.ndarray:
    """Case-folded FNV-1a hash of each token, reduced mod vocab_size."""
    return np.array(
        [_fnv1a(t.lower().encode("utf-8")) % vocab_size for t in token_texts],
        dtype=np.int64,
    )


def window_matrix(ids: np.ndarray, window: int, pad_id: int) -> np.ndarray:
    """(n, 2w+1) id matrix; out-of-sentence slots hold the padding id."""
    n = len(ids)
    cols = []
    for off in range(-window, window + 1):
        col = np.full(n, pad_id, dtype=np.int64)
        if off == 0:
            col[:] = ids
        elif off < 0:
            col[-off:] = ids[: n + off]
        else:
            col[: n - off] = ids[off:]
        cols.append(col)
    return np.stack(cols, axis=1)


@dataclass
class ForwardGraph:
    leaves: dict[tuple[str, str], ad.Node]
    features: ad.Node
    ner_logits: ad.Node
    domain_logits: ad.Node

    def gradient(self, key: tuple[str, str]) -> np.ndarray:
        leaf = self.leaves[key]
        return leaf.grad if leaf.grad is not None else np.zeros_like(leaf.value)


def forward_windows(
    params: TaggerParams,
    win_ids: np.ndarray,
    domain_grad_scale: float | None = None,
) -> ForwardGraph:
    """Run the tagger over a precomputed window-id matrix.

    When ``domain_grad_scale`` is set, a gradient-scaling node is inserted
    between the features and the domain head, leaving values untouched.
    """
    if win_ids.ndim != 2 or win_ids.shape[1] != 2 * params.config.context_window + 1:
        raise ShapeError(f"window matrix has shape {win_ids.shape}")
    if win_ids.shape[0] == 0:
        raise DataError("empty sentence")
    leaves = {key: ad.Node(arr) for key, arr in params.items_flat()}
    slots = [
        ad.embedding_lookup(leaves[("extractor", "embed")], win_ids[:, j])
        for j in range(win_ids.shape[1])
    ]
    x = ad.concat(slots, axis=1)
    h = ad.tanh(ad.add(ad.matmul(x, leaves[("extractor", "w_hidden")]),
                       leaves[("extractor", "b_hidden")]))
    ner_logits = ad.add(ad.matmul(h, leaves[("ner_head", "w")]), leaves[("ner_head", "b")])
    h_domain = ad.scale_gradient(h, domain_grad_scale) if domain_grad_scale is not None else h
    domain_logits = ad.add(ad.matmul(h_domain, leaves[("domain_head", "w")]),
                           leaves[("domain_head", "b")])
    return ForwardGraph(leaves, h, ner_logits, domain_logits)


def forward(params: TaggerParams, ids: np.ndarray,
            domain_grad_scale: float | None = None) -> ForwardGraph:
    """Forward pass over one sentence given per-token vocabulary ids."""
    cfg = params.config
    win = window_matrix(np.asarray(ids, dtype=np.int64), cfg.context_window, cfg.pad_id)
    return forward_windows(params, win, domain_grad_scale)


def predict_tag_ids(params: TaggerParams, ids: np.ndarray) -> np.ndarray:
    graph = forward(params, ids)
    return np.argmax(graph.ner_logits.value, axis=1)


def predict_tags(params: TaggerParams, token_texts: Sequence[str]) -> list[str]:
    """Argmax NER tags for one sentence of raw token strings."""
    ids = featurize(token_texts, params.config.vocab_size)
    return [TAG_ALPHABET[i] for i in predict_tag_ids(params, ids)]
