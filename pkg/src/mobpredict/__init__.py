"""Mobility predictability toolkit for WiFi association traces.

Stages: ingest raw association logs, discretize them into per-device
location series, run next-location predictors and entropy-based
predictability bounds, then tabulate the results per device class.
"""

__version__ = "0.1.0"
