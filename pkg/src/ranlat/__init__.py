"""Latency model of a 5G RAN slot grid."""
