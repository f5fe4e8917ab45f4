"""Verifiable information dispersal with homomorphic vector commitments.

Erasure-coded storage across n nodes where every node can check its own
chunk against the block commitment, so retrieval succeeds from any k
honest chunks without trusting the disperser.
"""

__version__ = "0.1.0"
