"""Eigenvalue counts for singular linear Hamiltonian systems via a renormalized Maslov index."""
