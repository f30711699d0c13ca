"""Exact symbolic calculus for operators on C([0, w_1])."""

from .ordinal import (OMEGA, OMEGA1, ONE, ZERO, Ordinal, OrdinalError, OrdinalSyntaxError,
                      add, classify, compare, format_ordinal, fundamental_sequence,
                      left_subtract, mul, nat, omega_pow, parse_ordinal, power)

__version__ = "0.1.0"
