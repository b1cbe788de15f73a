"""Dimensionality reduction: PCA, PLS, t-SNE and NMF."""

from .base import Dataset, FeatureSet, read_table_csv, write_table_csv
from .nmf import NmfModel, nmf_coefficients, nmf_fit, nmf_transform
from .pca import PcaModel, cumulative_explained_variance, pca_fit, pca_transform
from .pls import PlsModel, one_hot, pls_fit, pls_transform
from .tsne import TsneConfig, TsneModel, conditional_affinities, tsne_embed, tsne_fit

__all__ = [
    "Dataset", "FeatureSet", "read_table_csv", "write_table_csv",
    "NmfModel", "nmf_coefficients", "nmf_fit", "nmf_transform",
    "PcaModel", "cumulative_explained_variance", "pca_fit", "pca_transform",
    "PlsModel", "one_hot", "pls_fit", "pls_transform",
    "TsneConfig", "TsneModel", "conditional_affinities", "tsne_embed", "tsne_fit",
]
