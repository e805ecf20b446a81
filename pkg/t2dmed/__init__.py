# T2D medication classifier suite
__version__ = "1.0.0"
