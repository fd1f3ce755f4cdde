# Equilibria, thresholds and invasion analysis
