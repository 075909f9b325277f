"""Optimization loops for the three training modes, evaluation grouped by
region and entity, the inter-regional train/eval matrix, and embedding
export.

Modes and their gradient routing, for a batch loss pair (L_y, L_d):

* baseline   backpropagates L_y alone; the domain head receives nothing.
* grad_rev   backpropagates L_y + L_d, with a scale-by(-lambda) node
  between the features and the domain head: the domain head trains
  normally while the extractor receives the reversed, scaled gradient.
* loss_rev   backpropagates the single scalar L_y - lambda * L_d
  everywhere, so the domain head itself also receives reversed, scaled
  gradients.

Both losses are means over the tokens of the batch, which keeps lambda's
effective scale independent of batch size.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import autodiff as ad
from . import model as m
from .corpus import Region, Sentence, TAG_ALPHABET, TAG_TO_ID, iter_sentences
from .errors import ConfigError, DataError, HistnerError, TagError, TrainingError
from .metrics import PRF, format_table, strict_f1, token_accuracy

MODES = ("baseline", "grad_rev", "loss_rev")


@dataclass
class TrainConfig:
    mode: str = "baseline"
    epochs: int = 15
    lr: float = 1e-3
    weight_decay: float = 0.01
    batch_size: int = 32
    clip_norm: float = 2.0
    lam: float = 0.1
    seed: int = 0

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.clip_norm <= 0:
            raise ConfigError(f"clip_norm must be > 0, got {self.clip_norm}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")


@dataclass
class LossBreakdown:
    l_y: float
    l_d: float
    l_total: float


@dataclass
class EncodedSentence:
    windows: np.ndarray
    tag_ids: np.ndarray
    region_id: int

    def __len__(self) -> int:
        return len(self.tag_ids)


def encode_sentence(sentence: Sentence, config: m.TaggerConfig) -> EncodedSentence:
    ids = m.featurize(sentence.token_texts, config.vocab_size)
    try:
        tag_ids = np.array([TAG_TO_ID[t] for t in sentence.tags], dtype=np.int64)
    except KeyError as exc:
        raise TagError(f"unknown tag {exc.args[0]!r}")
    if len(tag_ids) != len(ids):
        raise DataError(f"{len(tag_ids)} tags for {len(ids)} tokens")
    return EncodedSentence(
        windows=m.window_matrix(ids, config.context_window, config.pad_id),
        tag_ids=tag_ids,
        region_id=int(sentence.region),
    )


def encode_sentences(sentences: Sequence[Sentence], config: m.TaggerConfig) -> list[EncodedSentence]:
    return [encode_sentence(s, config) for s in sentences]


# ---------------------------------------------------------------------------
# Losses and gradients
# ---------------------------------------------------------------------------

def compute_losses(
    params: m.TaggerParams,
    batch: Sequence[EncodedSentence],
    mode: str,
    lam: float,
) -> tuple[LossBreakdown, dict[tuple[str, str], np.ndarray]]:
    """One combined graph over the batch; returns the loss breakdown and
    the gradients for every parameter (zeros where a head is untouched)."""
    if not batch:
        raise DataError("empty batch")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    windows = np.concatenate([s.windows for s in batch], axis=0)
    tags = np.concatenate([s.tag_ids for s in batch])
    regions = np.concatenate(
        [np.full(len(s), s.region_id, dtype=np.int64) for s in batch]
    )
    scale = -lam if mode == "grad_rev" else None
    graph = m.forward_windows(params, windows, domain_grad_scale=scale)
    l_y = ad.mean(ad.softmax_cross_entropy(graph.ner_logits, tags))
    l_d = ad.mean(ad.softmax_cross_entropy(graph.domain_logits, regions))
    if mode == "baseline":
        total = l_y
        reported = float(l_y.value)
    elif mode == "grad_rev":
        # reported sum is for monitoring; the routing defines the method
        total = ad.add(l_y, l_d)
        reported = float(total.value)
    else:
        total = ad.sub(l_y, ad.mul(l_d, lam))
        reported = float(total.value)
    ad.backward(total)
    grads = {key: graph.gradient(key) for key, _ in params.items_flat()}
    breakdown = LossBreakdown(l_y=float(l_y.value), l_d=float(l_d.value), l_total=reported)
    return breakdown, grads


def global_grad_norm(grads: dict[tuple[str, str], np.ndarray]) -> float:
    return float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))


def clip_gradients(
    grads: dict[tuple[str, str], np.ndarray], max_norm: float
) -> dict[tuple[str, str], np.ndarray]:
    """Scale all gradients by max_norm/norm when the global L2 norm
    exceeds max_norm; otherwise return them unchanged."""
    norm = global_grad_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    factor = max_norm / norm
    return {key: g * factor for key, g in grads.items()}


# ---------------------------------------------------------------------------
# Adam with decoupled weight decay
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: dict[tuple[str, str], np.ndarray]
    v: dict[tuple[str, str], np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam_state(params: m.TaggerParams) -> AdamState:
    return AdamState(
        m={key: np.zeros_like(arr) for key, arr in params.items_flat()},
        v={key: np.zeros_like(arr) for key, arr in params.items_flat()},
    )


def adam_step(
    params: m.TaggerParams,
    grads: dict[tuple[str, str], np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
    keys: Sequence[tuple[str, str]] | None = None,
) -> None:
    """Bias-corrected Adam update in place. Weight decay is decoupled and
    applied before the moment update. ``keys`` restricts the update to a
    subset of parameters (used by the frozen-feature domain probe)."""
    state.step += 1
    t = state.step
    arrays = dict(params.items_flat())
    for key in keys if keys is not None else arrays:
        grad = grads[key]
        arr = arrays[key]
        if grad.shape != arr.shape:
            raise DataError(f"gradient shape {grad.shape} != param shape {arr.shape} for {key}")
        if weight_decay:
            arr -= lr * weight_decay * arr
        state.m[key] = state.beta1 * state.m[key] + (1 - state.beta1) * grad
        state.v[key] = state.beta2 * state.v[key] + (1 - state.beta2) * grad * grad
        m_hat = state.m[key] / (1 - state.beta1 ** t)
        v_hat = state.v[key] / (1 - state.beta2 ** t)
        arr -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# Prediction and evaluation
# ---------------------------------------------------------------------------

def predict_encoded(params: m.TaggerParams, encoded: Sequence[EncodedSentence],
                    chunk: int = 64) -> list[np.ndarray]:
    """Argmax tag ids per sentence, batching sentences into shared graphs."""
    out: list[np.ndarray] = []
    for lo in range(0, len(encoded), chunk):
        group = encoded[lo : lo + chunk]
        windows = np.concatenate([s.windows for s in group], axis=0)
        graph = m.forward_windows(params, windows)
        tag_ids = np.argmax(graph.ner_logits.value, axis=1)
        pos = 0
        for s in group:
            out.append(tag_ids[pos : pos + len(s)])
            pos += len(s)
    return out


def predict_corpus(params: m.TaggerParams, sentences: Sequence[Sentence]) -> list[list[str]]:
    encoded = encode_sentences(sentences, params.config)
    return [
        [TAG_ALPHABET[i] for i in ids]
        for ids in predict_encoded(params, encoded)
    ]


def domain_accuracy(params: m.TaggerParams, sentences: Sequence[Sentence]) -> float:
    """Per-token accuracy of the domain head against the region labels."""
    if not sentences:
        raise DataError("empty subset")
    encoded = encode_sentences(sentences, params.config)
    correct = total = 0
    for enc in encoded:
        graph = m.forward_windows(params, enc.windows)
        pred = np.argmax(graph.domain_logits.value, axis=1)
        correct += int((pred == enc.region_id).sum())
        total += len(enc)
    return correct / total


@dataclass
class RegionScore:
    accuracy: float
    f1: PRF


@dataclass
class EvalReport:
    per_region: dict[Region, RegionScore]
    per_label: dict[str, PRF]
    overall_accuracy: float
    overall_f1: PRF

    def to_json_dict(self) -> dict:
        return {
            "overall": {
                "accuracy": self.overall_accuracy,
                **self.overall_f1.to_json_dict(),
            },
            "per_region": {
                r.display: {"accuracy": s.accuracy, **s.f1.to_json_dict()}
                for r, s in self.per_region.items()
            },
            "per_label": {name: p.to_json_dict() for name, p in self.per_label.items()},
        }

    def render_text(self) -> str:
        rows = []
        for region, score in self.per_region.items():
            rows.append([region.display, f"{100 * score.accuracy:.2f}", f"{100 * score.f1.f1:.2f}"])
        rows.append(["Total", f"{100 * self.overall_accuracy:.2f}", f"{100 * self.overall_f1.f1:.2f}"])
        region_table = format_table(["Region", "Acc", "F1"], rows)
        label_rows = [[name, f"{100 * prf.f1:.2f}"] for name, prf in self.per_label.items()]
        label_table = format_table(["Entity", "F1"], label_rows)
        return region_table + "\n\n" + label_table


def evaluate(params: m.TaggerParams, sentences: Sequence[Sentence]) -> EvalReport:
    """Accuracy and strict F1 grouped by region, strict F1 per entity."""
    sentences = list(sentences)
    if not sentences:
        raise DataError("empty evaluation subset")
    predictions = predict_corpus(params, sentences)
    gold_tags = [list(s.tags) for s in sentences]
    gold_spans = [s.spans for s in sentences]
    from .corpus import decode_iob

    pred_spans = [decode_iob(tags) for tags in predictions]
    report = strict_f1(gold_spans, pred_spans)
    per_region: dict[Region, RegionScore] = {}
    for region in Region:
        idx = [i for i, s in enumerate(sentences) if s.region == region]
        if not idx:
            continue
        acc = token_accuracy([gold_tags[i] for i in idx], [predictions[i] for i in idx])
        f1 = strict_f1([gold_spans[i] for i in idx], [pred_spans[i] for i in idx]).overall
        per_region[region] = RegionScore(accuracy=acc, f1=f1)
    return EvalReport(
        per_region=per_region,
        per_label={l.name: p for l, p in report.per_label.items()},
        overall_accuracy=token_accuracy(gold_tags, predictions),
        overall_f1=report.overall,
    )


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    best_params: m.TaggerParams
    final_params: m.TaggerParams
    history: list[dict]
    best_epoch: int

    def history_json(self) -> str:
        return json.dumps(self.history, indent=2, sort_keys=True) + "\n"


def train(
    train_sentences: Sequence[Sentence],
    valid_sentences: Sequence[Sentence],
    tagger_config: m.TaggerConfig,
    config: TrainConfig,
) -> TrainResult:
    """Seeded, deterministic training; returns the best-validation-F1
    checkpoint (ties to the earlier epoch) alongside the final one."""
    config.validate()
    tagger_config.validate()
    if not train_sentences:
        raise DataError("empty train split")
    if not valid_sentences:
        raise DataError("empty valid split")
    params = m.init_params(tagger_config)
    encoded = encode_sentences(train_sentences, tagger_config)
    state = init_adam_state(params)
    rng = np.random.default_rng(config.seed)
    history: list[dict] = []
    best_f1 = -1.0
    best_epoch = -1
    best_params = params.copy()
    for epoch in range(config.epochs):
        order = rng.permutation(len(encoded))
        epoch_ly = epoch_ld = 0.0
        epoch_tokens = 0
        for lo in range(0, len(order), config.batch_size):
            batch = [encoded[i] for i in order[lo : lo + config.batch_size]]
            try:
                breakdown, grads = compute_losses(params, batch, config.mode, config.lam)
            except HistnerError as exc:
                raise TrainingError(
                    f"epoch {epoch}, batch at {lo}: {exc}"
                ) from exc
            grads = clip_gradients(grads, config.clip_norm)
            adam_step(params, grads, state, config.lr, config.weight_decay)
            n_tok = sum(len(s) for s in batch)
            epoch_ly += breakdown.l_y * n_tok
            epoch_ld += breakdown.l_d * n_tok
            epoch_tokens += n_tok
        valid_report = evaluate(params, valid_sentences)
        valid_domain = domain_accuracy(params, valid_sentences)
        l_y = epoch_ly / epoch_tokens
        l_d = epoch_ld / epoch_tokens
        if config.mode == "baseline":
            l_total = l_y
        elif config.mode == "grad_rev":
            l_total = l_y + l_d
        else:
            l_total = l_y - config.lam * l_d
        history.append(
            {
                "epoch": epoch,
                "l_y": l_y,
                "l_d": l_d,
                "l_total": l_total,
                "valid_f1": valid_report.overall_f1.f1,
                "valid_acc": valid_report.overall_accuracy,
                "valid_domain_acc": valid_domain,
            }
        )
        if valid_report.overall_f1.f1 > best_f1:
            best_f1 = valid_report.overall_f1.f1
            best_epoch = epoch
            best_params = params.copy()
    return TrainResult(
        best_params=best_params,
        final_params=params,
        history=history,
        best_epoch=best_epoch,
    )


def fit_domain_probe(
    params: m.TaggerParams,
    sentences: Sequence[Sentence],
    epochs: int = 10,
    lr: float = 1e-3,
    batch_size: int = 32,
    seed: int = 0,
) -> m.TaggerParams:
    """Retrain only the domain head on frozen features.

    Measures how much region information the feature extractor retains;
    extractor and NER head are left untouched.
    """
    probe = params.copy()
    encoded = encode_sentences(sentences, probe.config)
    if not encoded:
        raise DataError("empty probe training set")
    state = init_adam_state(probe)
    rng = np.random.default_rng(seed)
    domain_keys = [key for key, _ in probe.items_flat() if key[0] == "domain_head"]
    for _ in range(epochs):
        order = rng.permutation(len(encoded))
        for lo in range(0, len(order), batch_size):
            batch = [encoded[i] for i in order[lo : lo + batch_size]]
            windows = np.concatenate([s.windows for s in batch], axis=0)
            regions = np.concatenate(
                [np.full(len(s), s.region_id, dtype=np.int64) for s in batch]
            )
            graph = m.forward_windows(probe, windows)
            loss = ad.mean(ad.softmax_cross_entropy(graph.domain_logits, regions))
            ad.backward(loss)
            grads = {key: graph.gradient(key) for key in domain_keys}
            adam_step(probe, grads, state, lr, weight_decay=0.0, keys=domain_keys)
    return probe


# ---------------------------------------------------------------------------
# Inter-regional matrix and embedding export
# ---------------------------------------------------------------------------

@dataclass
class InterRegionalResult:
    regions: list[Region]
    matrix: np.ndarray  # [train_region, eval_region] strict F1

    def to_json_dict(self) -> dict:
        return {
            "regions": [r.display for r in self.regions],
            "f1": [[float(v) for v in row] for row in self.matrix],
        }

    def render_text(self) -> str:
        headers = ["train \\ eval"] + [r.display for r in self.regions]
        rows = []
        for i, region in enumerate(self.regions):
            rows.append([region.display] + [f"{100 * v:.2f}" for v in self.matrix[i]])
        return format_table(headers, rows)


def inter_regional(
    splits,
    tagger_config: m.TaggerConfig,
    config: TrainConfig,
    jobs: int = 1,
) -> InterRegionalResult:
    """Train one model per region and evaluate it on every region's test
    sentences; the diagonal is the intra-regional score."""
    regions = list(Region)
    train_by = {r: [s for s in iter_sentences(splits.train) if s.region == r] for r in regions}
    valid_by = {r: [s for s in iter_sentences(splits.valid) if s.region == r] for r in regions}
    test_by = {r: [s for s in iter_sentences(splits.test) if s.region == r] for r in regions}
    for r in regions:
        if not train_by[r]:
            raise DataError(f"region {r.display} has no training sentences")
        if not test_by[r]:
            raise DataError(f"region {r.display} has no evaluation sentences")

    def run(region: Region) -> m.TaggerParams:
        valid = valid_by[region] or test_by[region]
        return train(train_by[region], valid, tagger_config, config).best_params

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            models = list(pool.map(run, regions))
    else:
        models = [run(r) for r in regions]
    matrix = np.zeros((len(regions), len(regions)))
    for i, trained in enumerate(models):
        for j, eval_region in enumerate(regions):
            report = evaluate(trained, test_by[eval_region])
            matrix[i, j] = report.overall_f1.f1
    return InterRegionalResult(regions=regions, matrix=matrix)


def export_embeddings(
    params: m.TaggerParams, sentences: Sequence[Sentence], path: str | Path
) -> None:
    """One TSV row per sentence: region name, then the mean feature vector
    over its tokens at six decimal places."""
    encoded = encode_sentences(sentences, params.config)
    lines = []
    for sent, enc in zip(sentences, encoded):
        graph = m.forward_windows(params, enc.windows)
        mean_h = graph.features.value.mean(axis=0)
        values = "\t".join(f"{v:.6f}" for v in mean_h)
        lines.append(f"{sent.region.display}\t{values}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
