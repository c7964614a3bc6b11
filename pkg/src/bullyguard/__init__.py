"""Cyberbullying detection for Indonesian Instagram comments.

Provides corpus handling, a six-stage text preprocessing pipeline driven by
pluggable lexicons, TF-IDF featurization, three classical classifiers
(multinomial Naive Bayes, logistic regression, linear SVM), a from-scratch
BiLSTM classifier with optional additive attention, evaluation and
benchmarking utilities, and a command-line interface.
"""

__version__ = "0.1.0"
