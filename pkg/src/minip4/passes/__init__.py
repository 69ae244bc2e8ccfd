"""Nanopass pipeline with seeded defect toggles."""
from .base import PassCrash, ReparseFailure
from .catalog import BUGS, BugInfo, UnknownBug, check_bugs
from .pipeline import (PASS_ORDER, PASSES, PassTrace, TraceEntry, content_hash, dump_passes,
                       reparse, run_pass, run_pipeline)

__all__ = [
    "PassCrash", "ReparseFailure", "BUGS", "BugInfo", "UnknownBug", "check_bugs",
    "PASS_ORDER", "PASSES", "PassTrace", "TraceEntry", "content_hash", "dump_passes",
    "reparse", "run_pass", "run_pipeline",
]
