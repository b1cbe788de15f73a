"""Multiclass classifiers over extracted features."""

from ..errors import DomainError
from .bpnn import BpnnModel, bpnn_fit, bpnn_predict
from .gnb import GnbModel, gnb_fit, gnb_predict
from .grnn import GrnnModel, grnn_fit, grnn_predict
from .io import dumps, load_model, loads, save_model
from .knn import KnnModel, knn_fit, knn_predict
from .lda import LdaModel, lda_fit, lda_predict
from .plsda import PlsDaModel, plsda_fit, plsda_predict
from .svm import SvmModel, svm_fit, svm_predict

FITTERS = {
    "gnb": gnb_fit,
    "svm": svm_fit,
    "knn": knn_fit,
    "lda": lda_fit,
    "plsda": plsda_fit,
    "grnn": grnn_fit,
    "bpnn": bpnn_fit,
}


def fit_classifier(name, Y, labels, **params):
    """Fit a classifier by short name with keyword hyperparameters."""
    try:
        fit = FITTERS[name]
    except KeyError:
        raise DomainError(f"unknown classifier {name!r}; choose from {sorted(FITTERS)}") from None
    return fit(Y, labels, **params)


__all__ = [
    "FITTERS", "fit_classifier", "dumps", "loads", "save_model", "load_model",
    "BpnnModel", "bpnn_fit", "bpnn_predict", "GnbModel", "gnb_fit", "gnb_predict",
    "GrnnModel", "grnn_fit", "grnn_predict", "KnnModel", "knn_fit", "knn_predict",
    "LdaModel", "lda_fit", "lda_predict", "PlsDaModel", "plsda_fit", "plsda_predict",
    "SvmModel", "svm_fit", "svm_predict",
]
