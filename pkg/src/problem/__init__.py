# Boundary Value Problem Module
