"""Summarization rewards (ROUGE-L, ROUGESal, Entail) and self-critical
multi-reward policy-gradient training at toy scale."""
from .entailment import (EntailmentClassifier, LexicalEntailment, NliExample, entail_prob,
                         entail_reward, train_entailment)
from .metrics import (RougeScore, SaliencyWeights, lcs_len, novel_ngram_pct, rouge_l, rouge_n,
                      rouge_sal, union_lcs)
from .policy import (DecodeOutput, Seq2SeqPolicy, beam_decode, greedy_decode, sample_decode,
                     sequence_logprob_and_grad, xe_loss_and_grad)
from .rewards import make_reward
from .saliency import (LexiconSaliency, SaliencyTagger, SpanExample, eta_weights,
                       extract_keywords, predict_saliency, saliency_match_pct, train_saliency)
from .text import (DocumentSummaryPair, Vocabulary, build_vocab, load_corpus, split_sentences,
                   tokenize)
from .trainer import (SCSTSummarizer, TrainConfig, TrainReport, evaluate, mixed_step, scst_grad,
                      train)

__version__ = "0.1.0"

__all__ = [
    "EntailmentClassifier",
    "LexicalEntailment",
    "NliExample",
    "entail_prob",
    "entail_reward",
    "train_entailment",
    "RougeScore",
    "SaliencyWeights",
    "lcs_len",
    "novel_ngram_pct",
    "rouge_l",
    "rouge_n",
    "rouge_sal",
    "union_lcs",
    "DecodeOutput",
    "Seq2SeqPolicy",
    "beam_decode",
    "greedy_decode",
    "sample_decode",
    "sequence_logprob_and_grad",
    "xe_loss_and_grad",
    "make_reward",
    "LexiconSaliency",
    "SaliencyTagger",
    "SpanExample",
    "eta_weights",
    "extract_keywords",
    "predict_saliency",
    "saliency_match_pct",
    "train_saliency",
    "DocumentSummaryPair",
    "Vocabulary",
    "build_vocab",
    "load_corpus",
    "split_sentences",
    "tokenize",
    "SCSTSummarizer",
    "TrainConfig",
    "TrainReport",
    "evaluate",
    "mixed_step",
    "scst_grad",
    "train",
]
