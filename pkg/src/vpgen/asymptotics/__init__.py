"""Width sweeps, exponent fits and stability experiments."""
