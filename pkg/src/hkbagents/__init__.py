"""Embodied HKB-oscillator agents and collective decision simulations."""
