"""regosense: regolith intrusion sensing and adaptive-sampling campaigns."""

__version__ = "0.1.0"
