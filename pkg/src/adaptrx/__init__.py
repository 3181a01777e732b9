"""adaptrx: link-level OFDM testbed for online-learning neural receivers.

The package simulates a multi-antenna OFDM link over tapped-delay-line
fading, detects with either classical LS/MRC equalization or a small
convolutional network trained from scratch, and studies receivers that
keep fine-tuning in the field on randomized pilots without extra
overhead: half the pilots are hidden from the network's pilot input and
used as free training labels.
"""
__version__ = "0.1.0"
