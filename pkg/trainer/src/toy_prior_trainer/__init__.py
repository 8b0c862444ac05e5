"""Offline trainer for the tiny epsilon predictor: procedural toy data,
DDPM noise-prediction training, and weights export with parity vectors."""

from .dataset import ToyDatasetSpec, generate_toy_dataset
from .export import arch_hash, export_weights, import_weights, tensor_layout, write_parity_vectors
from .model import TinyEps, time_embedding
from .train import SCHEDULE, TrainingResult, evaluate_mse, train_toy_ddpm

__version__ = "0.1.0"
