"""Scalable string-kernel approximation: L1 embeddings of strings plus
space-light random Fourier features for the Laplacian kernel."""

from .cgk import CgkRandomness, cgk_embed, cgk_embed_corpus
from .classify import LinearModel, auc, cross_validate, train_linear
from .errors import ContractError, InputFormatError
from .esp import EspTree, LabelDictionary, build_esp_tree, characteristic_vector, esp_embed
from .kernels import average_error, edm_exact, exact_gram, laplacian_kernel
from .sfm import HashSeeds, fm_transform, sample_dense_projection, sfm_transform
from .vectors import CharacteristicVector

__version__ = "0.1.0"

__all__ = [
    "CgkRandomness",
    "CharacteristicVector",
    "ContractError",
    "EspTree",
    "HashSeeds",
    "InputFormatError",
    "LabelDictionary",
    "LinearModel",
    "auc",
    "average_error",
    "build_esp_tree",
    "cgk_embed",
    "cgk_embed_corpus",
    "characteristic_vector",
    "cross_validate",
    "edm_exact",
    "esp_embed",
    "exact_gram",
    "fm_transform",
    "laplacian_kernel",
    "sample_dense_projection",
    "sfm_transform",
    "train_linear",
]
