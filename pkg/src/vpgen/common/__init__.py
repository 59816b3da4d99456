"""Shared handler plumbing: logging, the experiment handler base and artifact models."""
