"""cadpipe: cleaning, Borderline-SMOTE balancing, autoencoder augmentation
and 1D-CNN classification for small imbalanced tabular medical datasets."""

__version__ = "0.1.0"
