"""Laboratory for random triangular group presentations.

Samples presentations whose relators are uniform cyclically reduced words of
length three, computes cancellation and reducedness functionals on labelled
2-complexes and van Kampen diagrams, measures fulfillment probabilities
exactly, derives density thresholds and the constants pipeline, and builds
truncated Cayley balls.
"""

__version__ = "0.1.0"
