"""Close-proximity multirotor docking with a learned downwash model."""
__version__ = "0.1.0"
