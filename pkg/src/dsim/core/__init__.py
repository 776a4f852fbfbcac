"""
src/dsim/core/__init__.py
Core components of the dsim estimator.

This package contains the data container, validation helpers and the progress
event dispatcher used by the experiment runner.
"""
from dsim.core.events import Event, EventDispatcher
from dsim.core.sample import Sample

__all__ = ["Event", "EventDispatcher", "Sample"]
