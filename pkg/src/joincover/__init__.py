"""Join covers under Hamming distance."""
