# Convergence Studies Module
