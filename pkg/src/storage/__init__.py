"""Text file formats for models, tree samples and target distributions."""

from .param_files import (
    CCD_HEADER,
    SBN_HEADER,
    SRF_HEADER,
    format_prob,
    load_model,
    load_sbn,
    store_ccd,
    store_model,
    store_sbn,
    store_srf,
)
from .tree_files import (
    TARGET_TOLERANCE,
    read_target_file,
    read_tree_file,
    write_target_file,
    write_tree_file,
)

__all__ = [
    "CCD_HEADER",
    "SBN_HEADER",
    "SRF_HEADER",
    "TARGET_TOLERANCE",
    "format_prob",
    "load_model",
    "load_sbn",
    "read_target_file",
    "read_tree_file",
    "store_ccd",
    "store_model",
    "store_sbn",
    "store_srf",
    "write_target_file",
    "write_tree_file",
]
