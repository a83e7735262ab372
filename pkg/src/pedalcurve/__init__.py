"""Pedal-coordinate curve toolkit."""
