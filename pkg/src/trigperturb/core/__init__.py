"""Core numerics: grids, interpolation, quadrature and Lebesgue constants."""
