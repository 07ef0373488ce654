"""Mask-guided stylization of labeled synthetic image datasets.

The package translates a labeled synthetic dataset toward the look of an
unlabeled real dataset by matching per-class color statistics, iterating a
stylize/segment loop so real-side masks improve round over round. It also
ships a hue-randomization baseline, per-class Frechet-distance auditing of
the remaining domain gap, and segmentation metrics.
"""

from .dataio import (
    IGNORE_LABEL,
    DatasetManifest,
    FeatureSet,
    LabeledPair,
    ManifestRecord,
    load_image,
    load_manifest,
    load_mask,
    load_pairs,
    read_features,
    save_image,
    save_mask,
    write_features,
    write_manifest,
)
from .errors import (
    EmptyManifestError,
    FeatureFormatError,
    ImageFormatError,
    ManifestError,
    PipelineError,
    SynstyleError,
    ValidationError,
)
from .fid import (
    ClassFid,
    FeatureExtractor,
    FidReport,
    class_frequencies,
    color_feature_extractor,
    frechet_distance,
    per_class_fid,
    report_to_csv,
    report_to_json,
    weighted_fid,
)
from .linalg import (
    GaussianStats,
    SymEig,
    psd_power,
    region_stats,
    sym_eig,
    trace_sqrt_product,
)
from .pipeline import PipelineConfig, PipelineRun, coarsen_mask, run_pipeline
from .randomize import hsv_to_rgb, hue_randomize, rgb_to_hsv
from .segmeval import (
    CentroidSegmenter,
    SegMetrics,
    confusion,
    load_segmenter,
    predict_mask,
    save_segmenter,
    segmentation_metrics,
    train_segmenter,
)
from .stylize import (
    StylizeConfig,
    StylizedRecord,
    all_ones_mask,
    box_mean,
    smooth,
    stylize_dataset,
    stylize_pair,
)

__version__ = "0.1.0"

__all__ = [
    "IGNORE_LABEL",
    "CentroidSegmenter",
    "ClassFid",
    "DatasetManifest",
    "EmptyManifestError",
    "FeatureExtractor",
    "FeatureFormatError",
    "FeatureSet",
    "FidReport",
    "GaussianStats",
    "ImageFormatError",
    "LabeledPair",
    "ManifestError",
    "ManifestRecord",
    "PipelineConfig",
    "PipelineError",
    "PipelineRun",
    "SegMetrics",
    "StylizeConfig",
    "StylizedRecord",
    "SymEig",
    "SynstyleError",
    "ValidationError",
    "all_ones_mask",
    "box_mean",
    "class_frequencies",
    "coarsen_mask",
    "color_feature_extractor",
    "confusion",
    "frechet_distance",
    "hsv_to_rgb",
    "hue_randomize",
    "load_image",
    "load_manifest",
    "load_mask",
    "load_pairs",
    "load_segmenter",
    "per_class_fid",
    "predict_mask",
    "psd_power",
    "read_features",
    "region_stats",
    "report_to_csv",
    "report_to_json",
    "rgb_to_hsv",
    "run_pipeline",
    "save_image",
    "save_mask",
    "save_segmenter",
    "segmentation_metrics",
    "smooth",
    "stylize_dataset",
    "stylize_pair",
    "sym_eig",
    "trace_sqrt_product",
    "train_segmenter",
    "weighted_fid",
    "write_features",
    "write_manifest",
]
