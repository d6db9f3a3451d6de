"""RA-DAE: online navigation learning with a width-adapting denoising autoencoder."""

__version__ = "0.1.0"
