"""Nonlocal correlation boxes, XOR nonlocality distillation and its statistics."""
