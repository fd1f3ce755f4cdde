# Chaos diagnostics on trajectories and time series
