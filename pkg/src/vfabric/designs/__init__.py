"""Circuit generators built on the dynamic-logic builder."""
