"""Synthetic analog clocks, a geometric clock reader, and cyclic RANSAC calibration."""

from .timecore import ClockTime, HandAngles, angles_to_time, circular_distance, decode_class, encode_time, hand_angles

__version__ = "0.1.0"
FORMAT_VERSION = "1.0.0"

__all__ = [
    "ClockTime",
    "HandAngles",
    "angles_to_time",
    "circular_distance",
    "decode_class",
    "encode_time",
    "hand_angles",
]
