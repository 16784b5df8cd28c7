"""Generate a small synthetic city and look at what lands on disk.

The generator writes one tab-separated CDR file per day plus a truth.csv
mapping each cell to the archetype that produced it. Records are split
unevenly within each half-hour bin so the files look like raw logs, yet
the per-bin sums are exactly reproducible from the spec and seed.
"""

import tempfile
from pathlib import Path

from cellcast import Archetype, SynthSpec, generate

spec = SynthSpec(
    archetypes=[
        Archetype(id=0, base_level=12.0, period_weights=(1, 1, 1, 5, 5, 2), noise_sd=0.4),
        Archetype(id=1, base_level=30.0, period_weights=(2, 1, 1, 1, 3, 6), noise_sd=0.4),
    ],
    cells_per_archetype=3,
    days=4,
    seed=20,
)

with tempfile.TemporaryDirectory() as out:
    paths, truth = generate(spec, out)
    print(f"wrote {len(paths)} day files for {len(truth)} cells")

    first = Path(paths[0])
    lines = first.read_text().splitlines()
    print(f"\n{first.name} holds {len(lines)} records; the first three:")
    for line in lines[:3]:
        print(" ", line.replace("\t", " | "))

    print("\ncell -> archetype truth:")
    for cell_id in sorted(truth):
        print(f"  cell {cell_id} came from archetype {truth[cell_id]}")

    print("\nRe-running generate() with the same spec gives byte-identical")
    print("files, which is what the pipeline determinism guarantee rests on.")
