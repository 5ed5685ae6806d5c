"""K_r graph bootstrap percolation: closures, witness graphs, tree witness graph counts."""
