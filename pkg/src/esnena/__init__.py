"""
esnena: echo state networks, their fixed points and excitable network attractors.
"""
__version__ = "0.1.0"
