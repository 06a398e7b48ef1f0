"""Python surface of the crosstalk simulation toolkit.

The heavy lifting lives in the compiled ``_qxs`` extension; this package
re-exports its operations and adds small JSON conveniences.
"""

import json

from ._qxs import (
    Circuit,
    attack_demo,
    build_benchmark,
    bundled_device_json,
    default_device_model_json,
    idt_roundtrip_entry,
    placed_fidelity,
    simulate_counts,
    spectator_sweep,
    synth_model_json,
    tvd,
    tvd_to_uniform,
)

__all__ = [
    "Circuit",
    "attack_demo",
    "build_benchmark",
    "bundled_device",
    "bundled_device_json",
    "default_device_model_json",
    "idt_roundtrip_entry",
    "placed_fidelity",
    "simulate_counts",
    "spectator_sweep",
    "synth_model_json",
    "tvd",
    "tvd_to_uniform",
]

__version__ = "0.1.0"


def bundled_device():
    """The shipped 27-qubit device as a parsed JSON document."""
    return json.loads(bundled_device_json())
