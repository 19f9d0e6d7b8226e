"""Exception types shared across the package.

The CLI maps these onto exit codes: plain ValueError -> 2 (bad arguments or
violated preconditions), AudioFormatError / CheckpointError -> 3 (malformed
input files), NonFiniteError -> 4 (numeric blow-up detected mid-pipeline).
"""


class AudioFormatError(ValueError):
    """Input file is not a mono 16-bit 16 kHz PCM WAV."""


class CheckpointError(ValueError):
    """Checkpoint file is malformed, truncated, or does not match the config."""


class NonFiniteError(ArithmeticError):
    """A NaN or Inf was produced or passed where finite values are required."""
