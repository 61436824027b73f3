"""Clique-complex homology, #SAT gadgets and quantum-estimator simulation."""
