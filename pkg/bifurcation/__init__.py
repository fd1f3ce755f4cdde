# Hopf and zero-Hopf thresholds, normal forms and curve tracing
