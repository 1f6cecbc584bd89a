from enum import Enum


class PoseSource(str, Enum):
    Zero = "zero"
    # seeded per-joint jitter, root kept upright
    Jitter = "jitter"
    # JSON array of BodyParams
    File = "file"
