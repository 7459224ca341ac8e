from .pgm import PGMFormatError, load_pgm, read_pgm, save_pgm, write_pgm
from .prng import SplitMix64, derive_seed
from .synthetic import SyntheticDataset, generate_dataset, load_dataset, save_dataset

__all__ = [
    "PGMFormatError",
    "read_pgm",
    "write_pgm",
    "load_pgm",
    "save_pgm",
    "SplitMix64",
    "derive_seed",
    "SyntheticDataset",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]
