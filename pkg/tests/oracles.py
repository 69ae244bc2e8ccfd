"""Independent checks shared by several test modules."""
import numpy as np

from minip4.mbt.target import execute
from minip4.semantics import ZERO, interpret_block
from minip4.semantics.concrete import evaluator_for, output_masks
from minip4.semantics.evaluate import lane_env


def sweep_mismatch(tp, policy=ZERO):
    """Compare semantics with direct execution on every input; None when they agree."""
    for c in tp.program.pipeline():
        sem = interpret_block(tp, c)
        n = 1 << sem.input_bits
        env = lane_env(sem.inputs, 0, n)
        vals, msks = evaluator_for(sem).run(env, policy, True)
        dc = output_masks(sem, vals, msks)
        out = execute(tp, c, env, n, policy)
        for o, v, d in zip(sem.outputs, vals, dc):
            got = out[o.name].astype(np.uint64)
            v = np.broadcast_to(v, (n,)).astype(np.uint64)
            d = np.broadcast_to(d, (n,)).astype(np.uint64)
            bad = ((got ^ v) & ~d) != 0
            if bad.any():
                i = int(np.argmax(bad))
                return f"{c}:{o.name} lane {i}: semantics {int(v[i])}, target {int(got[i])}"
    return None


def brute_truth(before_fn, after_fn, width):
    """Ground truth by plain Python enumeration of a one-input function pair."""
    return [x for x in range(1 << width) if before_fn(x) != after_fn(x)]
