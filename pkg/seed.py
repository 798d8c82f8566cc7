"""
Seed handling and named random streams.

Every draw site asks for its own stream by name. A stream is a PCG64 generator
seeded from SeedSequence(seed, spawn_key=<stable key derived from the name>),
so instances depend only on (seed, stream name) and never on the order in which
other streams were consumed.

Streams in use:
    p2.bundle_sizes   Poisson part of the bundle sizes of P2 series graphs
    p2.capacities     standard normals of the P2 capacity recurrence
    rmat.edges        quadrant choices of R-MAT edges
    rmat.capacities   uniform capacities of R-MAT arcs
    random.arcs       endpoints of gen_random arcs
    random.capacities capacities of gen_random arcs
    random.safe       safe flags of gen_random arcs
    observations      scenario samples drawn by hybrid_stats
"""

import random
import zlib
import numpy as np

import console


def generate(seed: int | None) -> int:
    if seed is None or seed < 0:
        seed = random.randint(0, 2**32 - 1)
        console.info(f"Random seed set to: {seed}")
    else:
        console.debug(f"Seed set to: {seed}")
    return seed


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, name: str) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed, spawn_key=(stream_key(name),))
    return np.random.Generator(np.random.PCG64(sequence))
