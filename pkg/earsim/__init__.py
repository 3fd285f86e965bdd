"""earsim: a desk-scale artificial ear for cognitive architectures."""

__version__ = "0.1.0"
