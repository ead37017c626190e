"""Dynamics on typed hypernetworks and reluctant synchrony breaking."""
