"""cineforge: deterministic text-to-video rendering.

Storyboard parsing, pluggable generator backends, exact-arithmetic frame
post-processing and interpolation, PCM audio conditioning, and external
H.264/AAC compositing, with evaluation metrics and an HTTP service.
"""

from .audiolab import AudioBuffer, MixPlan, read_wav, write_wav
from .backends import (
    BackendCapabilities,
    BackendSet,
    ImageRequest,
    MoodCatalog,
    SpeechConfig,
    make_backend_set,
)
from .compositor import FrameSequence, RenderArtifacts
from .errors import CineforgeError, ConfigValidationError, InvalidInputError
from .imageproc import FrameBuffer, PostProcessConfig
from .interpolate import Timeline, interpolate_frames
from .metrics import BleuParams, SsimParams, bleu, parsing_accuracy, ssim
from .pipeline import Job, RenderConfig, run_job, validate_config
from .storyboard import (
    CinematicVocabulary,
    Scene,
    Storyboard,
    parse_custom_storyboard,
    parse_generated_storyboard,
    serialize_storyboard,
)

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "MixPlan",
    "read_wav",
    "write_wav",
    "BackendCapabilities",
    "BackendSet",
    "ImageRequest",
    "MoodCatalog",
    "SpeechConfig",
    "make_backend_set",
    "FrameSequence",
    "RenderArtifacts",
    "CineforgeError",
    "ConfigValidationError",
    "InvalidInputError",
    "FrameBuffer",
    "PostProcessConfig",
    "Timeline",
    "interpolate_frames",
    "BleuParams",
    "SsimParams",
    "bleu",
    "parsing_accuracy",
    "ssim",
    "Job",
    "RenderConfig",
    "run_job",
    "validate_config",
    "CinematicVocabulary",
    "Scene",
    "Storyboard",
    "parse_custom_storyboard",
    "parse_generated_storyboard",
    "serialize_storyboard",
    "__version__",
]
