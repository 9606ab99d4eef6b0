"""Timed synthesis games with epsilon timed-automaton winning conditions,
bounded-resource timed controllers and deterministic separability."""

__version__ = "0.1.0"
