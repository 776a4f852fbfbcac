"""
src/dsim/core/events.py
Progress events for long-running fits and experiments.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

from dsim.core.utils import validate_callback, validate_instance_type, validate_non_empty_string
from dsim.exceptions import ExperimentEventError

logger = logging.getLogger(__name__)

REPLICATE_FINISHED = "replicate_finished"
REPLICATE_FAILED = "replicate_failed"
CELL_REGRESSED = "cell_regressed"


@dataclass(frozen=True)
class Event:
    """
    Represents a progress event with a name and optional payload.

    :ivar name: The name of the event.
    :ivar data: Optional data associated with the event.
    """

    name: str
    data: Any = None

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise ExperimentEventError("Event name must be a non-empty string")


class EventDispatcher:
    """
    Manages the registration and execution of progress listeners.

    Listeners are kept in registration order so that logging output is stable across
    runs. A listener that raises is logged and skipped; the experiment keeps going.
    """

    def __init__(self) -> None:
        self._listeners: Dict[str, List[Callable[[Event], None]]] = defaultdict(list)

    def add_listener(self, event_name: str, callback: Callable[[Event], None]) -> None:
        """
        Registers a callback function to listen for a specific event.

        :param event_name: The name of the event to listen for.
        :param callback: The function to be called when the event is dispatched.
        :raises DsimArgumentError: If the event name is empty or the callback is not callable.
        """
        validate_instance_type("event_name", event_name, str)
        validate_non_empty_string("event_name", event_name)
        validate_callback(event_name, callback)

        if callback not in self._listeners[event_name]:
            self._listeners[event_name].append(callback)

    def remove_listener(self, event_name: str, callback: Callable[[Event], None]) -> None:
        """
        Removes a callback function from the listener list of a specific event.

        :param event_name: The name of the event to remove the listener from.
        :param callback: The function to be removed.
        """
        validate_instance_type("event_name", event_name, str)
        validate_non_empty_string("event_name", event_name)
        validate_callback(event_name, callback)

        if event_name in self._listeners:
            if callback in self._listeners[event_name]:
                self._listeners[event_name].remove(callback)

            if not self._listeners[event_name]:
                del self._listeners[event_name]

    def dispatch(self, event: Event) -> None:
        """
        Dispatches an event, calling all registered listeners for the event name.

        :param event: An instance of Event.
        :raises DsimArgumentError: If the provided event is not an instance of Event.
        """
        validate_instance_type("event", event, Event)

        event_name = event.name

        if event_name not in self._listeners:
            logger.debug(f"Event '{event_name}' was dispatched but has no listeners")
            return

        for callback in list(self._listeners[event_name]):
            try:
                callback(event)
            except Exception as e:
                logger.error(f"Error in event '{event_name}' listener: {e}", exc_info=True)
