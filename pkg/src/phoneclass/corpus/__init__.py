"""Corpus ingestion: inventory, alignments, frame records, balancing, splits."""

from phoneclass.corpus.alignments import (
    AlignmentSegment,
    UtteranceRecord,
    parse_alignments,
    read_alignment_file,
)
from phoneclass.corpus.frames import (
    FRAME_LENGTH_S,
    BalancingPolicy,
    CorpusManifest,
    FrameRecord,
    balance,
    class_histogram,
    extract_frames,
    read_frames_csv,
    split_train_validation,
    write_frames_csv,
)
from phoneclass.corpus.inventory import (
    N_CLASSES,
    N_PHONES,
    PhoneInventory,
    default_inventory_path,
    load_inventory,
)

__all__ = [
    "AlignmentSegment",
    "BalancingPolicy",
    "CorpusManifest",
    "FRAME_LENGTH_S",
    "FrameRecord",
    "N_CLASSES",
    "N_PHONES",
    "PhoneInventory",
    "UtteranceRecord",
    "balance",
    "class_histogram",
    "default_inventory_path",
    "extract_frames",
    "load_inventory",
    "parse_alignments",
    "read_alignment_file",
    "read_frames_csv",
    "split_train_validation",
    "write_frames_csv",
]
