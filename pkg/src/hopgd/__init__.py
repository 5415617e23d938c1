"""Self-supervised node embeddings from precomputed multi-hop graph views.

Message passing happens once, up front, as K sparse multiplies; training
and inference then run on a plain one-layer MLP. Training discriminates
original from corrupted rows (plus two structure heads) while a min-max
loop balances how much each hop contributes.
"""

__version__ = "0.1.0"
