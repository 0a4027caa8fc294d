# Error Norms Module
