"""mcert: numerical certification toolkit for multiplier regularity and
rigidity conditions on SL(n,R), with brute-force oracles at desk scale."""

__version__ = "0.1.0"
