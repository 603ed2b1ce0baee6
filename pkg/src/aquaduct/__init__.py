"""Software SCADA water-tank testbed with ML-based intrusion detection."""

__version__ = "0.1.0"
