"""Frame-level phone classification pipeline for French speech.

Corpus ingestion and phone-balanced dataset construction, two encoder
families (a small CNN over mel-spectrogram context windows and pluggable
raw-waveform backends) behind one shared classifier head, seeded training
with best-epoch checkpoint selection, and an evaluation suite: balanced
accuracies with bootstrap confidence intervals, phonetic-class confusion
matrices, and correlation of per-speaker accuracy with expert perceptual
ratings.
"""

__version__ = "0.1.0"
