"""Grade-level readability assessment for Portuguese-style annotated text.

Feature extraction over six linguistic categories, a from-scratch linear
SVM (one-vs-one), recursive feature elimination, hyperplane-distance
active learning, cross-validation and inter-annotator agreement.
"""

__version__ = "0.1.0"
