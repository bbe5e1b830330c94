"""Classical multidimensional scaling under dissimilarity noise: embeddings,
closed-form limiting covariances, and a Monte Carlo verification harness."""

from . import clt, cmds, harness, matrixcore, noise, pointmodel, rawstress

__all__ = ["clt", "cmds", "harness", "matrixcore", "noise", "pointmodel",
           "rawstress"]
__version__ = "0.1.0"
