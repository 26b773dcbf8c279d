"""Counter-based random streams and the shared Bernoulli mask sampler.

All randomness in the package flows through Philox, a counter-based
generator, so that parallel draws are reproducible independently of
scheduling.  Stream splitting rule: the stream for (seed, index) uses the
128-bit Philox key

    key = (index << 64) | (seed mod 2**64)

i.e. the base seed occupies the low word and the split index the high
word.  Distinct (seed, index) pairs therefore never share a stream (a
plain XOR of index into the seed, by contrast, collides across nearby
base seeds).  Subsystems compose their index as salt * 2**32 + counter
using the salts below, which keeps e.g. the sampler of draw 3 and the
eigensolver start vector of draw 3 on different streams.
"""

import numpy as np

# index-space salts, one per consumer of randomness
SALT_SAMPLE = 1      # Bernoulli masks of subsample draws
SALT_EIG = 2         # eigensolver start vectors
SALT_SYNTH = 3       # synthetic model generators
SALT_GRAPH = 4       # random graph generators
SALT_PROFILE = 5     # concentration profiling draws
SALT_BLOWUP = 6      # degree blow-up experiment cells

_MASK64 = (1 << 64) - 1


def split_index(salt, counter):
    """Compose a stream index from a subsystem salt and a draw counter."""
    if not 0 <= counter < (1 << 32):
        raise ValueError(f"draw counter {counter} outside [0, 2^32)")
    return (int(salt) << 32) | int(counter)


def stream(seed, index=0):
    """Independent Generator for the given (seed, index) pair."""
    key = (int(index) << 64) | (int(seed) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seeds(seed, salt, count, lane=0):
    """Per-draw base seeds for a batch of `count` independent tasks.

    Drawn in draw order from the master stream (seed, salt, lane), so the
    mapping draw index -> seed is a pure function of those three and does
    not depend on how the tasks are later scheduled.  Distinct lanes (for
    example, the cells of a sweep) get disjoint seed batches.
    """
    master = stream(seed, split_index(salt, lane))
    return master.integers(0, 2**63 - 1, size=count, dtype=np.int64)


def bernoulli_positions(total, p, rng):
    """Positions of the successes in `total` iid Bernoulli(p) trials.

    Uses geometric gap skipping, so cost is O(number of successes) and
    matrices far too large to enumerate entry by entry can be sampled at
    small p.  Returns a strictly increasing int64 array in [0, total).
    """
    total = int(total)
    if total < 0:
        raise ValueError("total must be nonnegative")
    if total == 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    # batch size is a pure function of (total, p) so output is a pure
    # function of the stream state
    batch = int(min(total, max(1024, 1.2 * total * p + 64)))
    parts = []
    pos = -1
    while True:
        gaps = rng.geometric(p, size=batch).astype(np.int64, copy=False)
        cum = pos + np.cumsum(gaps)
        if cum[-1] >= total:
            parts.append(cum[cum < total])
            break
        parts.append(cum)
        pos = int(cum[-1])
    return np.concatenate(parts)
