# Vision projector package
from promptssl.projectors.common import ProjectorError
from promptssl.projectors.vision import VisionProjector, project

__all__ = ["ProjectorError", "VisionProjector", "project"]
