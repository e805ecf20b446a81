"""
Classical classifiers: logistic regression, LDA, k-NN, Gaussian naive Bayes,
decision tree, random forest and linear SVM.
"""
from t2dmed.services.classic.registry import ClassifierRegistry, classifier_registry

__all__ = ['ClassifierRegistry', 'classifier_registry']
