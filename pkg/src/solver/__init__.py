# Linear Solver Module
