"""gaze-extractor: offline first-subtoken embedding export to the binary
store format consumed by the training harness."""

__version__ = "0.1.0"
