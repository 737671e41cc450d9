"""Second-order attention and similarity for retrieval descriptors.

Thin bindings over the C++ core: GeM pooling, the attention block, the
triplet losses, retrieval metrics, descriptor stores and toy models.
"""

from ._core import (
    DEFAULT_SCALES,
    IoError,
    Model,
    ValidationError,
    attention_map,
    average_precision,
    fos_loss,
    fpr_at_95,
    gem_pool,
    read_store,
    run_cli,
    soa_forward,
    sos_loss,
    total_loss,
    write_store,
)

__all__ = [
    "DEFAULT_SCALES",
    "IoError",
    "Model",
    "ValidationError",
    "attention_map",
    "average_precision",
    "fos_loss",
    "fpr_at_95",
    "gem_pool",
    "read_store",
    "run_cli",
    "soa_forward",
    "sos_loss",
    "total_loss",
    "write_store",
]
