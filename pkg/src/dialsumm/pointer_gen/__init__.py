"""Pointer-generator summarizer with coverage attention, in plain numpy."""
from .beam import beam_search, beam_search_decode, greedy_decode, greedy_search, model_step_fn
from .model import (DecoderStepOutput, Encoded, Example, ModelConfig, PointerGenerator, decode_step,
                    encode, encode_tokens, load_model, loss_and_grads, make_example, mix_distributions,
                    save_model, sequence_loss, step_outputs)
from .train import TrainConfig, clip_by_global_norm, train
from .vocab import PAD, RESERVED, START, STOP, UNK, Vocab, build_vocab

__all__ = [
    "beam_search", "beam_search_decode", "greedy_decode", "greedy_search", "model_step_fn",
    "DecoderStepOutput", "Encoded", "Example", "ModelConfig", "PointerGenerator", "decode_step",
    "encode", "encode_tokens", "load_model", "loss_and_grads", "make_example", "mix_distributions",
    "save_model", "sequence_loss", "step_outputs", "TrainConfig", "clip_by_global_norm", "train",
    "PAD", "RESERVED", "START", "STOP", "UNK", "Vocab", "build_vocab",
]
