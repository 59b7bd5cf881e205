"""Clifford circuits, stabilizer tableaux, encoders and defect dynamics."""
