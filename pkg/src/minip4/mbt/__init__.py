"""Model-based testing: path-directed test cases run against a reference target."""
from .paths import (DEFAULT_LIMIT, PathCondition, PathList, TestCase, UnsatisfiablePath,
                    derive_testcases, enumerate_paths, satisfies, solve_path, substitute)
from .runner import BACKEND, MbtStats, run_mbt
from .stf import StfCase, StfEntry, StfError, case_inputs, expect_hex, packet_hex, read_stf, write_stf
from .target import MissingInput, TargetCrash, TargetResult, execute, run_target

__all__ = [
    "DEFAULT_LIMIT", "PathCondition", "PathList", "TestCase", "UnsatisfiablePath",
    "derive_testcases", "enumerate_paths", "satisfies", "solve_path", "substitute",
    "BACKEND", "MbtStats", "run_mbt",
    "StfCase", "StfEntry", "StfError", "case_inputs", "expect_hex", "packet_hex", "read_stf",
    "write_stf",
    "MissingInput", "TargetCrash", "TargetResult", "execute", "run_target",
]
