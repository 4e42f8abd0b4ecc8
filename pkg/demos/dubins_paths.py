"""Gallery of shortest bounded-turn paths between a few pose pairs."""

import math

from ghmdatsp import Config, dubins_shortest_path, sample_path

cases = [
    ("straight ahead", Config(0, 0, 0), Config(10, 0, 0), 1.0),
    ("half turn", Config(0, 0, 0), Config(0, 2, math.pi), 1.0),
    ("U to the side", Config(0, 0, 0), Config(0, -4, math.pi), 1.0),
    ("tight reverse", Config(0, 0, 0), Config(1.0, 0.5, math.pi), 1.0),
    ("long diagonal", Config(0, 0, math.pi / 4), Config(30, 14, -math.pi / 3), 2.5),
]

for name, a, b, r in cases:
    path = dubins_shortest_path(a, b, r)
    arcs = ", ".join(f"{letter}={seg:.3f}" for letter, seg in zip(path.word, path.segment_params))
    print(f"{name:14s} word {path.word}  length {path.length:8.3f}  ({arcs})")
    poses = sample_path(path, path.length / 8 if path.length else 1.0)
    trail = "  ".join(f"({p.x:5.1f},{p.y:5.1f})" for p in poses)
    print(f"{'':14s} trail {trail}")
