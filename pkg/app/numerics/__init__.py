"""Discretization, symmetry, potential, energy and fibering numerics"""
