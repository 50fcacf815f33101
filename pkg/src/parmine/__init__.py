"""parmine: parallel-passage mining and retrieval evaluation for
multilingual corpora.
"""

__version__ = "0.1.0"
