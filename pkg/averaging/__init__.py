# Averaging at zero-Hopf points and Poincare validation
