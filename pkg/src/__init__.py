"""
Efficient-price order book toolkit: simulation, likelihood and estimation of
limit order book models driven by a hidden Brownian efficient price.
"""

__version__ = "0.3.0"
