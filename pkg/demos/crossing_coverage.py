"""Why crossing neighbourhoods shrink tours.

Two tasks sit close enough that any bounded-turn maneuver through the
first task's sample also sweeps the second task's disk.  The decoder
notices and deletes the second node from the tour; the brute-force
reference confirms the shortened tour is optimal.
"""

from ghmdatsp import (Chromosome, build_instance, build_roadmap, decode,
                      decode_nin, solve_bruteforce)
from ghmdatsp.memetic import delim_gene, task_gene

instance = build_instance(
    [(600.0, 0.0), (680.0, 40.0)],
    n_vehicles=1,
    samples_per_cluster=1,
    velocity=50,
    sensing_range=150.0,
    depots=[(0.0, 0.0)],
    seed=13,
)
roadmap = build_roadmap(instance)

for node_id, crossed in roadmap.nin_node_to_tasks.items():
    if crossed:
        node = roadmap.node_by_id[node_id]
        print(f"node of task {node.cluster} necessarily crosses tasks {sorted(crossed)}")

chrom = Chromosome([delim_gene((1, 1)), task_gene(1, 1), task_gene(2, 1)])
plain = decode(chrom, roadmap)
reduced = decode_nin(chrom, roadmap)
print(f"visit both nodes: cost {plain.objective:.1f}")
print(f"after pruning:    cost {reduced.objective:.1f} "
      f"({len(reduced.deleted)} node(s) dropped)")

optimum = solve_bruteforce(roadmap)
print(f"exact optimum:    cost {optimum.objective:.1f}")
