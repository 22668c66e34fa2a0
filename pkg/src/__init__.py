"""CG-SENSE reconstruction for non-Cartesian multi-coil MRI."""

__version__ = "0.1.0"
