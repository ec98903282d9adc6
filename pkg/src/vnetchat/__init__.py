"""Chat-driven virtual network management: natural-language prompts drive
parameter updates and an exact VM placement / routing solver."""

__version__ = "0.1.0"
