"""
mwen - micro water-energy nexus co-optimization.

Centralized MILP dispatch of a community microgrid and its water system,
and the decentralized alternative: ADMM / objective-based ADMM between a
microgrid agent and a water agent that share only power consumption.
"""

__version__ = "0.1.0"
