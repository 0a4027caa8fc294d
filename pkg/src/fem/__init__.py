# Finite Element Core Module
