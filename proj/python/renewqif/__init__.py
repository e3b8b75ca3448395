"""Streaming renewable estimation for cluster-correlated regression."""

from ._rqif import *  # noqa: F401,F403
