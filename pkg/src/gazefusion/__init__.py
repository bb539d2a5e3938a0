"""gazefusion: token-level eye-tracking feature prediction.

Engineered token features plus precomputed contextual embeddings feed a
4-output regression head trained with AdamW/MSE, evaluated by MAE against
baselines, with a zero-replacement feature-ablation sweep.
"""

__version__ = "0.1.0"
