"""Reference external classifier speaking the stdio classification protocol.

A worked example of plugging any model into the certification engine:
implement one function from a reconstructed bit vector to a label id,
hand it to serve(), and the engine's `proto:` classifier can drive it
as a child process.
"""

from .models import label_propagation_classifier, parity_classifier
from .session import ClassifyFn, ProtocolSession, serve

__all__ = [
    "ClassifyFn",
    "ProtocolSession",
    "label_propagation_classifier",
    "parity_classifier",
    "serve",
]
