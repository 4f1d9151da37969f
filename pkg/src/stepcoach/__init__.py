"""stepcoach: turn how-to videos into coach plans and live assistance sessions.

The pipeline compiles a word-timestamped transcript into a step/action
hierarchy, enriches each action with demonstration descriptions and
status criteria, grounds tips in an accessibility knowledge base, and
runs monitored sessions over a frame stream with intent-routed Q&A.
"""

__version__ = "0.1.0"

PLAN_SCHEMA_VERSION = "coachplan/1"
