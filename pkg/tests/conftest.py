import os
import shutil
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from minip4.lang import parse_program, typecheck  # noqa: E402

CORPUS = os.path.join(os.path.dirname(__file__), "..", "src", "minip4", "corpus")
CORPUS = os.path.normpath(CORPUS)

if "GAUNTLET_SOLVER" not in os.environ and shutil.which("z3"):
    os.environ["GAUNTLET_SOLVER"] = "z3 -in"


def corpus_files():
    return sorted(f for f in os.listdir(CORPUS) if f.endswith(".mp4l"))


def load(name):
    with open(os.path.join(CORPUS, name)) as fh:
        return typecheck(parse_program(fh.read()))


def solver_available():
    cmd = os.environ.get("GAUNTLET_SOLVER", "").split()
    return bool(cmd) and shutil.which(cmd[0]) is not None


needs_solver = pytest.mark.skipif(not solver_available(), reason="no GAUNTLET_SOLVER configured")
