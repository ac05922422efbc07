"""Desk-scale toolkit for DRAM bit-flip profile statistics and the fault
attacks correlated flips enable: ECDSA nonce-fault key recovery through a
hidden-number-problem lattice, and tokenizer dictionary token swaps."""

__version__ = "0.1.0"
