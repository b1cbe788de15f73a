"""Versioned JSON persistence for fitted classifiers."""

import dataclasses
import json

import numpy as np

from ..errors import FormatError
from ..features.pls import PlsModel
from .bpnn import BpnnModel
from .gnb import GnbModel
from .grnn import GrnnModel
from .knn import KnnModel
from .lda import LdaModel
from .plsda import PlsDaModel
from .svm import SvmModel

FORMAT = "terasense-model"
VERSION = 1

_TYPES = {cls.__name__: cls for cls in
          (GnbModel, SvmModel, KnnModel, LdaModel, PlsDaModel, PlsModel, GrnnModel, BpnnModel)}


def _encode(value):
    if isinstance(value, np.ndarray):
        return {"__ndarray__": value.tolist(), "dtype": value.dtype.str, "shape": list(value.shape)}
    if dataclasses.is_dataclass(value):
        return {"__model__": type(value).__name__,
                **{f.name: _encode(getattr(value, f.name)) for f in dataclasses.fields(value)}}
    if isinstance(value, tuple):
        return {"__tuple__": [_encode(v) for v in value]}
    if isinstance(value, np.generic):
        return value.item()
    return value


def _decode(value):
    if isinstance(value, dict):
        if "__ndarray__" in value:
            return np.array(value["__ndarray__"], dtype=np.dtype(value["dtype"])).reshape(value["shape"])
        if "__tuple__" in value:
            return tuple(_decode(v) for v in value["__tuple__"])
        if "__model__" in value:
            name = value["__model__"]
            if name not in _TYPES:
                raise FormatError(f"unknown model type {name!r}")
            kwargs = {k: _decode(v) for k, v in value.items() if k != "__model__"}
            return _TYPES[name](**kwargs)
    return value


def dumps(model):
    return json.dumps({"format": FORMAT, "version": VERSION, "model": _encode(model)}, sort_keys=True)


def loads(text):
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise FormatError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')!r}")
    return _decode(doc["model"])


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load_model(path):
    with open(path) as fh:
        return loads(fh.read())
