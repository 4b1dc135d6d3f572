"""Distance functions, metric projections, curvature radii and cut loci of planar domains."""
