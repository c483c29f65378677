"""Few-shot table-to-text pipeline: prototype-guided generation with
adapter-based knowledge augmentation.

The heavy lifting lives in the compiled ``_adaptgen`` extension; this package
re-exports its public surface. The extension sits inside the package in an
installed wheel, and at the top level when imported straight from a CMake
build tree via PYTHONPATH; both locations are supported.
"""

try:
    from . import _adaptgen as _ext
except ImportError:  # build-tree layout
    import _adaptgen as _ext

__all__ = [
    "AdapterPlacement",
    "AttributeValuePair",
    "DatasetRecord",
    "EntityOverlap",
    "EntitySpan",
    "FreezePolicy",
    "MaskedPrompt",
    "MetricReport",
    "ModelConfig",
    "ParentConfig",
    "PRF",
    "PrototypeMember",
    "PrototypeSelector",
    "PrototypeSet",
    "SelectorConfig",
    "Seq2SeqModel",
    "Table",
    "Vocab",
    "bleu4",
    "detect_entities",
    "entity_overlap_report",
    "evaluate_all",
    "hinge_ranking_loss",
    "linearize_table",
    "mask_entities",
    "parent_f",
    "parse_dataset_record",
    "rouge4",
    "sample_negatives",
    "tokenize",
    "unmask",
]

for _name in __all__:
    globals()[_name] = getattr(_ext, _name)

__version__ = "1.0.0"
