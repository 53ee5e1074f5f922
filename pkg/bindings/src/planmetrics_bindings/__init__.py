"""In-process bindings for the planmetrics toolkit.

Every operation marshals plain buffers (JSON text, raw RGB bytes with an
explicit shape) into the primary library's types and delegates; no metric,
pipeline, or tokenizer math is reimplemented here, so results are identical
to the command-line tool bit-for-bit.
"""

from .api import (
    BoundHandle,
    bind_detokenize,
    bind_editing_score,
    bind_generation_score,
    bind_run_pipeline,
    bind_tokenize,
    bind_understanding_score,
    open_handle,
)

__version__ = "0.1.0"

__all__ = [
    "BoundHandle",
    "bind_detokenize",
    "bind_editing_score",
    "bind_generation_score",
    "bind_run_pipeline",
    "bind_tokenize",
    "bind_understanding_score",
    "open_handle",
    "__version__",
]
