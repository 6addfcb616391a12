"""Point counts, zeta functions, exponential sums and truncated Dwork operators
for polynomial systems over small finite fields."""

__version__ = "0.1.0"
