# Integration and absorbing bounds
