"""radiocov: synthetic urban radio coverage by 2D ray launching, dataset
construction, convolutional coverage predictors with hand-written
backpropagation, and a prediction service for interactive design."""

__version__ = "0.1.0"
