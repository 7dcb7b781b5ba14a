"""
Unmonitored Customer Estimator

Estimates the number and segment distribution of unique customers behind
retail receipts that are not linked to a loyalty card.
"""
