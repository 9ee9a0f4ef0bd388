"""Guided tabular data synthesis with mutual-information dependency graphs."""

from .dataset import FeatureSchema, Table, load_table, make_table, split, write_table
from .engine import Engine, fit_engine
from .guidance import GuidanceConfig
from .sampler import SamplerConfig, SynthRecord, records_to_table, synthesize

__all__ = [
    "Engine",
    "FeatureSchema",
    "GuidanceConfig",
    "SamplerConfig",
    "SynthRecord",
    "Table",
    "fit_engine",
    "load_table",
    "make_table",
    "records_to_table",
    "split",
    "synthesize",
    "write_table",
]

__version__ = "0.1.0"
