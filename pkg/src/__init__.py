"""Tree-probability estimation with subsplit Bayesian networks."""
