"""A generative stand-in for a sense-annotated corpus at SemCor scale.

Documents mix a few topics; each sentence draws one topic from its document.
Every sense of a lemma belongs to a topic, so the words around a sense tend
to be the ones its topic favors, and moving one sense's uses to a single
half of the corpus changes the lemma's contexts there. Frequencies are
Zipfian and frequent lemmas tend to have more senses. A per-lemma share of
uses is emitted without annotation, which produces relative-frequency error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import AnnotatedCorpus, Sentence, Token

__all__ = ["SyntheticConfig", "generate_corpus", "SEMCOR_SCALE"]

_ONSETS = ("b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "ch", "cl", "dr", "fl", "gr", "pl", "pr", "sh", "st", "th", "tr")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "ou")
_CODAS = ("", "", "n", "r", "s", "t", "l", "m", "nd", "st", "ck")
_POS = ("NOUN", "VERB", "ADJ", "ADV")
_POS_WEIGHTS = (0.55, 0.25, 0.15, 0.05)


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 0
    documents: int = 352
    sentences_per_document: int = 106
    mean_length: float = 18.0
    lemmas: int = 12_000
    zipf_exponent: float = 1.0
    topics: int = 80
    topics_per_document: int = 2
    function_words: int = 150
    function_share: float = 0.5
    # Share of content tokens drawn from words outside the sense inventory.
    unlisted_share: float = 0.2
    unlisted_words: int = 6000
    # Relative weight of a sense in a sentence whose topic is not the sense's own.
    off_topic_weight: float = 0.015
    # Probability that a further sense reuses the topic of the lemma's first sense.
    shared_topic_rate: float = 0.25
    sense_concentration: float = 0.8
    # Expected extra senses per decade of lemma frequency.
    polysemy_rate: float = 1.0
    # Unannotated-use rate per lemma ~ Beta(a, b).
    noise_a: float = 0.8
    noise_b: float = 3.0

    def __post_init__(self):
        if min(self.documents, self.sentences_per_document, self.lemmas, self.topics) < 1:
            raise ValueError("sizes must be positive")
        if not 0 <= self.function_share < 1 or not 0 <= self.unlisted_share < 1:
            raise ValueError("shares must lie in [0, 1)")


SEMCOR_SCALE = SyntheticConfig()


def _words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        syllables = rng.integers(1, 4)
        word = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] + _CODAS[rng.integers(len(_CODAS))]
            for _ in range(syllables)
        )
        if len(word) > 2 and word not in taken:
            taken.add(word)
            out.append(word)
    return out


def _zipf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def _draw(rng: np.random.Generator, cdf: np.ndarray, size: int) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right"), len(cdf) - 1)


def generate_corpus(config: SyntheticConfig = SEMCOR_SCALE) -> AnnotatedCorpus:
    """Generate the corpus deterministically from ``config.seed``."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    taken: set[str] = set()
    function = _words(rng, config.function_words, taken)
    lemmas = _words(rng, config.lemmas, taken)
    unlisted = _words(rng, config.unlisted_words, taken)
    pos = rng.choice(len(_POS), size=config.lemmas, p=_POS_WEIGHTS)

    lemma_p = _zipf(config.lemmas, config.zipf_exponent)
    expected = lemma_p * config.documents * config.sentences_per_document * config.mean_length
    # Frequent lemmas are more polysemous, as in dictionaries.
    n_senses = 1 + rng.poisson(np.clip(config.polysemy_rate * np.log10(1 + expected), 0, None))

    # Flatten (lemma, sense) pairs with their topic and marginal weight.
    pair_lemma, pair_sense, pair_topic, pair_weight = [], [], [], []
    for i in range(config.lemmas):
        k = n_senses[i]
        probs = np.sort(rng.dirichlet(np.full(k, config.sense_concentration)))[::-1]
        first = rng.integers(config.topics)
        for s in range(k):
            topic = first if s == 0 or rng.random() < config.shared_topic_rate else rng.integers(config.topics)
            pair_lemma.append(i)
            pair_sense.append(s)
            pair_topic.append(topic)
            pair_weight.append(lemma_p[i] * probs[s])
    pair_lemma = np.array(pair_lemma)
    pair_sense = np.array(pair_sense)
    pair_topic = np.array(pair_topic)
    pair_weight = np.array(pair_weight)
    noise = rng.beta(config.noise_a, config.noise_b, size=config.lemmas)

    topic_cdfs = []
    for z in range(config.topics):
        w = pair_weight * np.where(pair_topic == z, 1.0, config.off_topic_weight)
        topic_cdfs.append(np.cumsum(w))
    function_cdf = np.cumsum(_zipf(config.function_words, 1.1))
    unlisted_cdf = np.cumsum(_zipf(config.unlisted_words, 1.0))

    sentences = []
    for d in range(config.documents):
        doc_topics = rng.choice(config.topics, size=config.topics_per_document, replace=False)
        mix = rng.dirichlet(np.ones(config.topics_per_document))
        for j in range(config.sentences_per_document):
            z = doc_topics[rng.choice(config.topics_per_document, p=mix)]
            length = 1 + rng.poisson(config.mean_length - 1)
            kinds = rng.random(length)
            n_function = int((kinds < config.function_share).sum())
            content = kinds >= config.function_share
            unl = content & (rng.random(length) < config.unlisted_share)
            listed = content & ~unl
            fw = iter(_draw(rng, function_cdf, n_function))
            uw = iter(_draw(rng, unlisted_cdf, int(unl.sum())))
            pw = iter(_draw(rng, topic_cdfs[z], int(listed.sum())))
            tokens = []
            for t in range(length):
                if listed[t]:
                    p = next(pw)
                    i = pair_lemma[p]
                    word = lemmas[i]
                    if rng.random() < noise[i]:
                        tokens.append(Token(word))
                    else:
                        tag = _POS[pos[i]]
                        sense = f"{word}.{tag[0].lower()}.{pair_sense[p] + 1:02d}"
                        tokens.append(Token(word, word, tag, sense))
                elif unl[t]:
                    tokens.append(Token(unlisted[next(uw)]))
                else:
                    tokens.append(Token(function[next(fw)]))
            tokens.append(Token("."))
            sentences.append(Sentence(f"d{d:03d}.s{j:03d}", tuple(tokens)))
    return AnnotatedCorpus(tuple(sentences))
